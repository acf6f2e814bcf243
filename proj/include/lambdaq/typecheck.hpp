#pragma once

#include "lambdaq/schema.hpp"
#include "lambdaq/term.hpp"

#include <string>
#include <utility>
#include <vector>

namespace lambdaq {

/// Stack of binder frames; lookup resolves to the innermost binding.
class TypeEnv {
public:
    void push(const std::vector<Binder>& frame);
    void pop();
    const TypeExpr* lookup(const std::string& name) const;

private:
    std::vector<std::vector<std::pair<std::string, TypeExpr>>> frames_;
};

/// Type of `t` under `env`. Application of a tuple-valued term to a matching
/// argument list is componentwise equality and has type Bool.
TypeExpr infer_type(const Term& t, TypeEnv& env, const Schema& schema);

/// Checks that `t` is a closed lambda with a Bool body and returns its signature.
QuerySignature check_query(const Term& t, const Schema& schema);

/// Assigns types to untyped binders and constants from the positions they
/// occupy (attribute arguments, tuple components, comparison partners, COUNT
/// element bases). Every variable occurrence receives its binder's type.
/// Throws Errc::AmbiguousVariable when a binder stays untyped.
Term infer_binder_types(Term t, const Schema& schema);

/// Default base of an untyped literal: String, Number, Bool or Date.
TypeExpr literal_base(const Value& v);

} // namespace lambdaq
