#pragma once

#include "lambdaq/schema.hpp"
#include "lambdaq/term.hpp"

#include <string>
#include <string_view>

namespace lambdaq {

enum class Syntax { Raw, Friendly };

/// Raw λ-term syntax: `lambda t (exists m, r Movie(m)(t, 'Spielberg', r))`.
/// Untyped binders are typed from the positions they occupy.
Term parse_term_raw(std::string_view text, const Schema& schema);

/// Friendly syntax: `{t^Title | exists m^Movie Movie(m^Movie)(t^Title, 'Spielberg'^Director)}`.
/// Also accepts lambda-form queries. Applications that supply only some
/// arguments, placed by their type tags, get the rest as fresh existential
/// variables.
Term parse_term_friendly(std::string_view text, const Schema& schema);

Term parse_query(std::string_view text, const Schema& schema, Syntax syntax);

/// Raw syntax; parse_term_raw(render_term(t)) is alpha-equal to t.
std::string render_term(const Term& t);

} // namespace lambdaq
