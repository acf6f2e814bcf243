#pragma once

#include "lambdaq/error.hpp"
#include "lambdaq/eval.hpp"
#include "lambdaq/parser.hpp"
#include "lambdaq/schema.hpp"
#include "lambdaq/store.hpp"
#include "lambdaq/translate.hpp"
#include "lambdaq/typecheck.hpp"

#include <random>
#include <set>
#include <string>
#include <vector>

namespace lqtest {

using namespace lambdaq;

std::string fixture_file(const std::string& name);
std::string slurp(const std::string& path);

struct World {
    Schema schema;
    Stores stores;
};

/// The movies-small fixture, optionally with the mediation file applied.
World movies_small(bool with_mediation = false);
/// Aliased schema (Title_g ~ Title_r) with the given graph and CSV text.
World aliased(const std::string& graph_lines, const std::string& movies_csv);

Term raw(const std::string& text, const Schema& s);
Term friendly(const std::string& text, const Schema& s);

/// Rows as display strings, for readable expectations.
std::set<std::vector<std::string>> text_rows(const Relation& r);

extern const char* const kTitlesRaw;
extern const char* const kDivisionRaw;
extern const char* const kTitlesFriendly;
extern const char* const kDivisionFriendly;
extern const char* const kCountQuery;

// Nested-loop oracles. They read the stores directly and share no code with
// the evaluator.
std::set<std::vector<std::string>> oracle_titles(const Stores& st);
std::set<std::vector<std::string>> oracle_division(const Stores& st);
/// (user id, genre, count) for every user and every Genre value.
std::set<std::vector<std::string>> oracle_count(const Stores& st);

// Random material over the movies schema with at most five values per base.
struct RandomWorld {
    std::string graph_lines;
    std::string actors_csv;
    std::string movies_csv;
};
RandomWorld random_world(std::mt19937& rng);
Stores load_world(const RandomWorld& w, const Schema& schema);

struct GenOptions {
    int max_depth = 3;
    bool allow_or = true;
    bool allow_count = true;
    /// Restricts to conjunctions, positive and negated single-source pieces,
    /// and forall-implies.
    bool translatable = false;
    /// Only atoms, and, exists, comparisons.
    bool positive_existential = false;
};

/// A closed, type-correct query λ x1..xk body over the movies schema.
Term random_query(std::mt19937& rng, const Schema& schema, const GenOptions& opt);
/// A closed Bool formula plus one free variable for quantifier tests.
Term random_formula(std::mt19937& rng, const Schema& schema, const std::vector<Binder>& context,
                    const GenOptions& opt);

} // namespace lqtest
