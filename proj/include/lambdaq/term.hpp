#pragma once

#include "lambdaq/error.hpp"
#include "lambdaq/types.hpp"
#include "lambdaq/value.hpp"

#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace lambdaq {

enum class TermKind {
    Var,
    Const,
    App,
    Lambda,
    TupleCons,
    Component,
    Not,
    And,
    Or,
    Implies,
    Exists,
    Forall,
    Count,
    Compare,
    Arith,
    AttrRef,
};

enum class CmpOp { Eq, Lt, Le, Gt, Ge };
enum class ArithOp { Add, Sub, Mul };

std::string_view to_string(CmpOp op);
std::string_view to_string(ArithOp op);

/// A variable introduced by a lambda or a quantifier. The type is absent only
/// between parsing and binder-type inference.
struct Binder {
    std::string name;
    std::optional<TypeExpr> type;
    bool operator==(const Binder&) const = default;
};

/// LT term. A plain value tree; children live in `kids`:
///   App: [fn, arg1..argn]          Lambda/Exists/Forall: [body]
///   Component: [tuple]             Not: [f]; And/Or/Implies: [lhs, rhs]
///   Count: [set term]              Compare/Arith: [lhs, rhs]
///   TupleCons: components
struct Term {
    TermKind kind = TermKind::Const;
    std::string name;            ///< Var name, AttrRef name, Count element base
    std::optional<TypeExpr> type;///< Var type, Const base
    Value value;                 ///< Const
    std::vector<Term> kids;
    std::vector<Binder> binders; ///< Lambda parameters, quantified variables
    int index = 0;               ///< Component, 1-based
    CmpOp cmp = CmpOp::Eq;
    ArithOp arith = ArithOp::Add;
    std::optional<SourceSpan> span;

    static Term var(std::string name, std::optional<TypeExpr> type = std::nullopt);
    static Term constant(Value v, std::optional<TypeExpr> base = std::nullopt);
    static Term attr(std::string name);
    static Term app(Term fn, std::vector<Term> args);
    static Term lambda(std::vector<Binder> params, Term body);
    static Term tuple(std::vector<Term> components);
    static Term component(Term tuple, int index);
    static Term negate(Term f);
    static Term conj(Term a, Term b);
    static Term disj(Term a, Term b);
    static Term implies(Term a, Term b);
    static Term exists(std::vector<Binder> vars, Term body);
    static Term forall(std::vector<Binder> vars, Term body);
    static Term count(std::string element_base, Term set);
    static Term compare(CmpOp op, Term lhs, Term rhs);
    static Term arith_op(ArithOp op, Term lhs, Term rhs);

    const Term& body() const { return kids.front(); }
    bool is_quantifier() const { return kind == TermKind::Exists || kind == TermKind::Forall; }
    bool is_binder() const { return kind == TermKind::Lambda || is_quantifier(); }
};

/// Ordered output columns of a query: the top-level lambda parameters.
struct QuerySignature {
    std::vector<std::pair<std::string, TypeExpr>> columns;
    bool operator==(const QuerySignature&) const = default;
};

std::set<std::string> free_vars(const Term& t);

/// Equality up to consistent renaming of bound variables. Directly nested
/// quantifiers of one kind are treated as a single binder set, so
/// `exists m, r` equals `exists r, m` and `exists m (exists r ...)`.
bool alpha_equal(const Term& a, const Term& b);

/// Throws Errc::IllFormed on duplicate binders in one list, empty
/// applications, component index < 1, undefined literals or a Count without
/// element base.
void check_well_formed(const Term& t);

/// Non-throwing variant: the diagnostic, or empty when well formed.
std::optional<std::string> well_formed(const Term& t);

/// Flattens a tree of binary And into its conjuncts, left to right.
std::vector<Term> conjuncts(const Term& t);
Term make_conjunction(std::vector<Term> parts);

/// Attribute names referenced by AttrRef leaves, with multiplicity.
std::vector<std::string> attr_refs(const Term& t);

/// Constants of the term, paired with their base names.
std::vector<std::pair<std::string, Value>> constants(const Term& t);

/// Capture-avoiding renaming of free occurrences of `from` to `to`.
Term rename_free(const Term& t, const std::string& from, const std::string& to);

/// A variable name not in `used`, derived from `hint`; inserts it into `used`.
std::string fresh_name(std::string_view hint, std::set<std::string>& used);

/// All variable names occurring anywhere (free, bound or binder).
std::set<std::string> all_var_names(const Term& t);

} // namespace lambdaq
