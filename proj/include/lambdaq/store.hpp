#pragma once

#include "lambdaq/schema.hpp"
#include "lambdaq/value.hpp"

#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace lambdaq {

/// Property graph held as attribute instances: finite partial mappings from a
/// source entity to a value (single-valued shapes) or to a finite set
/// (multivalued shapes).
class GraphStore {
public:
    /// Loads the line format (`node ...` / `edge ...`). Nodes of the whole
    /// text are declared before any edge is checked.
    void load(std::string_view text, const Schema& schema);

    bool has_entity(std::string_view type, std::string_view id) const;
    std::vector<Value> entities(std::string_view type) const;

    /// Stored value of a single-valued attribute, or Undef.
    Value lookup(const std::string& attr, const std::string& source_id) const;
    /// Stored set of a multivalued attribute (possibly empty).
    Value members(const std::string& attr, const std::string& source_id) const;

    /// Declares a node; exposed for tests that build stores by hand.
    void add_entity(const std::string& type, const std::string& id);
    void set_single(const std::string& attr, const std::string& source_id, Value v);
    void add_member(const std::string& attr, const std::string& source_id, Value v);

    /// Instances flattened to rows in the attribute's row layout, sorted.
    std::vector<Row> rows(const AttributeDecl& attr) const;

    bool operator==(const GraphStore&) const = default;

private:
    std::map<std::string, std::set<std::string>, std::less<>> entities_;
    std::map<std::string, std::map<std::string, Value>, std::less<>> single_;
    std::map<std::string, std::map<std::string, std::set<Value>>, std::less<>> multi_;
};

class RelStore {
public:
    void insert(const std::string& relation, Row row);
    const std::set<Row>& tuples(const std::string& relation) const;
    bool contains(const std::string& relation, const Row& row) const;
    std::size_t size(const std::string& relation) const { return tuples(relation).size(); }

    bool operator==(const RelStore&) const = default;

private:
    std::map<std::string, std::set<Row>, std::less<>> relations_;
};

struct Stores {
    GraphStore graph;
    RelStore rel;
    bool operator==(const Stores&) const = default;
};

GraphStore load_graph_lines(std::string_view text, const Schema& schema);

/// Loads RFC-4180 CSV whose header names the relation's column bases in order.
/// Duplicate rows collapse.
void load_relation_csv(std::string_view relation, std::string_view csv, const Schema& schema, RelStore& into);

/// Parses CSV into records; exposed for tests.
std::vector<std::vector<std::string>> parse_csv(std::string_view text);

/// Parses a data literal of the graph line format against a carrier.
Value parse_data_literal(std::string_view text, Carrier carrier);

/// Single-valued application attr(arg); Undef where the function is undefined.
Value lookup_single(const Stores& stores, const Schema& schema, std::string_view attr, const Value& arg);

/// Membership test in the attribute's row layout: for graph attributes the
/// row is [source, member components...], for relations the tuple itself.
bool test_membership(const Stores& stores, const Schema& schema, std::string_view attr, const Row& row);

/// All rows stored for an attribute in its row layout.
std::vector<Row> scan_rows(const Stores& stores, const Schema& schema, const AttributeDecl& attr);

/// Values occurring under `base` or any alias of it, plus `extra` constants;
/// for entity bases the declared node set. Sorted and duplicate-free.
std::vector<Value> active_domain(std::string_view base, std::span<const Value> extra, const Stores& stores,
                                 const Schema& schema);

/// Throws if an instance mentions an undeclared node or holds an ill-typed value.
void check_integrity(const Stores& stores, const Schema& schema);

} // namespace lambdaq
