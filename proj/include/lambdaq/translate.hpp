#pragma once

#include "lambdaq/eval.hpp"
#include "lambdaq/schema.hpp"
#include "lambdaq/store.hpp"
#include "lambdaq/term.hpp"

#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace lambdaq {

// ---------------------------------------------------------------------------
// Block IR: one SELECT-like block of scans and conditions, with NOT EXISTS
// sub-blocks. Shared by SQL and Cypher emission and by plan execution.

struct Block;

struct Expr {
    enum class Kind { Column, Const, Arith, Count };
    Kind kind = Kind::Const;
    int scan = -1; ///< Column: global scan id
    int col = -1;  ///< Column: position in the scan's row layout
    Value value;   ///< Const
    ArithOp op = ArithOp::Add;
    std::vector<Expr> kids;        ///< Arith operands; Count: [element]
    std::shared_ptr<Block> sub;    ///< Count: the block enumerating elements

    static Expr column(int scan, int col);
    static Expr constant(Value v);
};

struct Scan {
    enum class Kind { Attribute, Domain };
    Kind kind = Kind::Attribute;
    int id = 0;         ///< global, 1-based in compile order; rendered as t<id> in SQL
    std::string name;   ///< attribute name, or base name of a domain scan
    std::vector<std::string> layout; ///< column bases
};

struct Cond {
    enum class Kind { Compare, NotCompare, InDomain, NotExists, False };
    Kind kind = Kind::Compare;
    CmpOp op = CmpOp::Eq;
    Expr lhs, rhs;
    std::string base;            ///< InDomain
    std::shared_ptr<Block> sub;  ///< NotExists
};

struct Block {
    std::vector<Scan> scans;
    std::vector<Cond> conds;
    /// Variables visible in the block and the expressions binding them.
    std::vector<std::pair<std::string, Expr>> vars;
    /// Base of each variable of `vars`.
    std::vector<std::pair<std::string, TypeExpr>> var_types;
};

struct CompiledQuery {
    Block block;
    std::vector<std::pair<std::string, Expr>> outputs;
    int scan_count = 0;
};

/// Compiles a checked query in the translatable fragment: conjunctions,
/// positive existentials, atoms, comparisons, negation, forall/implies via
/// NOT EXISTS, and output variables defined as COUNT of a lambda.
/// Throws Errc::UnsupportedConstruct with the offending node's span.
CompiledQuery compile_query(const Term& query, const Schema& schema);

/// Runs a compiled query against the stores. Domain scans range over the
/// active domain including the constants of `root`.
Relation execute_compiled(const CompiledQuery& q, const QuerySignature& signature, const Term& root,
                          const Stores& stores, const Schema& schema, const EvalOptions& options = {});

std::string to_sql(const Term& query, const Schema& schema);
std::string to_cypher(const Term& query, const Schema& schema);

// ---------------------------------------------------------------------------
// Federation

/// One conjunctive piece of a query split by source: the graph part, the
/// relational part, and the attribute-free conditions connecting them.
struct SourceSegment {
    /// Columns the segment produces.
    std::vector<std::pair<std::string, TypeExpr>> vars;
    /// Closed lambdas over the exported variables of each side.
    std::optional<Term> graph_query;
    std::optional<Term> rel_query;
    /// Equalities (graph variable, relational variable) to join on.
    std::vector<std::pair<std::string, std::string>> join_keys;
    /// Attribute-free conjuncts evaluated on joined rows.
    std::vector<Term> cross;
    /// Variables no atom binds; enumerated from active domains.
    std::vector<Binder> uncovered;
};

struct SourcePartition {
    /// Conjunction of the graph parts (free variables are the exports).
    std::optional<Term> graph_subterm;
    std::optional<Term> rel_subterm;
    /// Exported variables with their bases, graph side first.
    std::vector<std::pair<std::string, TypeExpr>> shared_vars;
    std::vector<std::pair<std::string, std::string>> join_keys;
    /// Defining terms of derived variables (COUNT and arithmetic).
    std::vector<std::pair<std::string, Term>> post_aggregations;
    std::vector<SourceSegment> segments;
};

/// Splits a checked query by the source of its attributes.
/// Throws Errc::NotPartitionable when a disjunction or negation spans both
/// sources, Errc::UnsupportedConstruct for shapes the planner cannot split.
SourcePartition partition_by_source(const Term& query, const Schema& schema);

struct PlanStep {
    enum class Kind { FetchGraph, FetchRelational, Mediate, Join, Enumerate, Derive, Filter, Project, Evaluate };
    Kind kind = Kind::Project;
    std::string text;
};

std::string_view to_string(PlanStep::Kind k);

struct Derivation {
    std::string var;
    TypeExpr type;
    /// COUNT of the lambda's element per group, zero-completed.
    std::optional<SourceSegment> count_segment;
    std::string element_var;
    std::vector<std::string> group_vars;
    /// Attribute-free defining term, evaluated per row.
    std::optional<Term> expr;
};

struct FederatedPlan {
    Term query;
    QuerySignature signature;
    /// Rows over the enumerated output variables; absent means the product
    /// of their active domains.
    std::optional<SourceSegment> main;
    std::vector<std::pair<std::string, TypeExpr>> enumerated;
    std::vector<Derivation> derivations;
    std::vector<Term> post_filters;
    std::vector<PlanStep> steps;
    /// Set when the query falls outside the plannable fragment; execution
    /// then evaluates the whole query directly.
    std::optional<std::string> fallback;
};

/// Builds the plan. Queries the planner cannot split run through evaluation
/// with `fallback` set; cross-source disjunction or negation still throws
/// NotPartitionable.
FederatedPlan plan_federated(const Term& query, const Schema& schema);

/// Numbered step listing, one step per line.
std::string render_plan(const FederatedPlan& plan);

Relation execute_plan(const FederatedPlan& plan, const Stores& stores, const Schema& schema,
                      const EvalOptions& options = {});

} // namespace lambdaq
