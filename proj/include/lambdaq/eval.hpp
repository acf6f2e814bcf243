#pragma once

#include "lambdaq/schema.hpp"
#include "lambdaq/store.hpp"
#include "lambdaq/term.hpp"

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace lambdaq {

/// A query result. Rows are kept ordered so equal relations compare equal.
struct Relation {
    QuerySignature signature;
    std::set<Row> rows;

    bool operator==(const Relation&) const = default;
};

struct Binding {
    enum class Kind { Enumerate, Derive };
    Kind kind = Kind::Enumerate;
    std::string var;
    TypeExpr type;
    /// Defining term of a derived variable; its free variables are bound earlier.
    std::optional<Term> definition;
};

struct BindingPlan {
    std::vector<Binding> steps;
};

struct EvalOptions {
    /// Upper bound on candidate assignments of one enumeration.
    std::uint64_t max_domain = 10'000'000;
};

/// True when variables of `base` can be enumerated from the active domain:
/// entity bases, Bool, and bases that occur as a column of some attribute.
bool enumerable_base(const TypeExpr& type, const Schema& schema);

/// Orders the output variables of a checked query. A variable with a
/// top-level conjunct `v = e` (or `e = v`) where e only mentions earlier
/// variables is derived; otherwise it is enumerated when its base allows it.
/// Throws Errc::UnsafeQuery when neither applies.
BindingPlan analyze_range_restriction(const Term& query, const Schema& schema);

/// Reference nested-loop evaluation over active domains.
Relation eval_query(const Term& query, const Stores& stores, const Schema& schema, const EvalOptions& options = {});

/// As above, with active domains extended by the constants of
/// `constants_root` instead of those of `query` (for subqueries of a larger
/// query).
Relation eval_query(const Term& query, const Stores& stores, const Schema& schema, const EvalOptions& options,
                    const Term& constants_root);

/// Value of a closed, type-correct term. Bool-valued lambdas and
/// relation attributes evaluate to sets.
Value eval_closed(const Term& t, const Stores& stores, const Schema& schema, const EvalOptions& options = {});

/// Active domain of every base mentioned by `t`, including its constants.
class DomainCache {
public:
    DomainCache(const Stores& stores, const Schema& schema, std::vector<std::pair<std::string, Value>> constants);

    const std::vector<Value>& of(const std::string& base);
    /// Cartesian product of component domains for tuple types.
    std::vector<Value> of_type(const TypeExpr& type);

private:
    const Stores& stores_;
    const Schema& schema_;
    std::vector<std::pair<std::string, Value>> constants_;
    std::map<std::string, std::vector<Value>> cache_;
};

namespace detail {
class Evaluator;
}

/// Evaluates open terms under explicit variable assignments. Quantifiers
/// range over the active domains of the stores plus the constants of `root`.
class TermEvaluator {
public:
    TermEvaluator(const Term& root, const Stores& stores, const Schema& schema, const EvalOptions& options = {});
    ~TermEvaluator();
    TermEvaluator(const TermEvaluator&) = delete;
    TermEvaluator& operator=(const TermEvaluator&) = delete;

    Value eval(const Term& t, const std::vector<std::pair<std::string, Value>>& env);
    DomainCache& domains();

private:
    std::unique_ptr<detail::Evaluator> impl_;
};

} // namespace lambdaq
