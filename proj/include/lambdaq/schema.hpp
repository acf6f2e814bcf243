#pragma once

#include "lambdaq/types.hpp"
#include "lambdaq/value.hpp"

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace lambdaq {

enum class Source { Graph, Relational };

/// Attribute shapes a property graph or a relational database can realize.
enum class Shape {
    NodeProps,      ///< ((S1, ..., Sm): R)  or (S: R)
    EdgeSingle,     ///< ((S1, ..., Sm, R1): R2)
    EdgeMulti,      ///< ((Bool: S1, ..., Sm, R1): R2), m >= 1
    EdgePlain,      ///< (R1: R2)
    EdgePlainMulti, ///< ((Bool: R1): R2)
    Relation,       ///< (Bool: S1, ..., Sn)
};

std::string_view to_string(Source s);
std::string_view to_string(Shape s);

/// True for the shapes whose application yields a characteristic function.
bool is_multivalued(Shape s);

struct AttributeDecl {
    std::string name;
    TypeExpr type;
    Source source = Source::Graph;
    Shape shape = Shape::NodeProps;

    bool operator==(const AttributeDecl&) const = default;
};

struct MediationMap {
    /// Value-compatible descriptive bases, typically (graph base, relational base).
    std::vector<std::pair<std::string, std::string>> type_aliases;
    /// (external name, canonical attribute name).
    std::vector<std::pair<std::string, std::string>> attr_renames;

    bool operator==(const MediationMap&) const = default;
};

/// Result of resolve_name: exactly one of the pointers is set.
struct NameRef {
    const AttributeDecl* attribute = nullptr;
    const BaseType* base = nullptr;
};

class Schema {
public:
    /// Starts with the built-in bases Bool, Number, String and Date.
    Schema();

    void declare_base(BaseType base);
    const BaseType* find_base(std::string_view name) const;
    const BaseType& base(std::string_view name) const;
    bool is_entity(std::string_view name) const;
    bool is_descriptive(std::string_view name) const;
    bool is_builtin(std::string_view name) const;

    /// Bases in declaration order, built-ins first.
    const std::vector<BaseType>& bases() const noexcept { return bases_; }

    /// Parses type notation and checks that every base is declared.
    TypeExpr parse_type(std::string_view text) const;
    void check_type(const TypeExpr& t) const;

    Shape classify(const TypeExpr& t) const;
    const AttributeDecl& declare_attribute(std::string name, TypeExpr type, Source source);
    const AttributeDecl* find_attribute(std::string_view canonical) const;
    const std::vector<AttributeDecl>& attributes() const noexcept { return attributes_; }

    /// Applies renames, then looks the name up among attributes and bases.
    NameRef resolve_name(std::string_view name) const;
    /// Like resolve_name but requires an attribute.
    const AttributeDecl& resolve_attribute(std::string_view name) const;
    std::string canonical_name(std::string_view name) const;

    void add_alias(const std::string& a, const std::string& b);
    void add_rename(const std::string& external, const std::string& canonical);
    const MediationMap& mediation() const noexcept { return mediation_; }

    /// Same base, or both in one alias class.
    bool compatible(std::string_view a, std::string_view b) const;
    /// All bases aliased with `base` (including itself), sorted.
    std::vector<std::string> alias_class(std::string_view base) const;

    /// The node_props attribute describing an entity type, if any.
    const AttributeDecl* node_props_for(std::string_view entity) const;

    /// Base names of the flat row layout an attribute's instances are stored
    /// under: [entity, props...] for node properties, [source, props...,
    /// target] for edges, the columns for relations.
    std::vector<std::string> row_layout(const AttributeDecl& attr) const;

    bool validate_value(const Value& v, const TypeExpr& t) const;

    /// Schema file text; load_schema_text(render()) == *this.
    std::string render() const;

    bool operator==(const Schema& other) const;

private:
    std::vector<BaseType> bases_;
    std::map<std::string, std::size_t, std::less<>> base_index_;
    std::vector<AttributeDecl> attributes_;
    std::map<std::string, std::size_t, std::less<>> attr_index_;
    MediationMap mediation_;
};

Schema load_schema_text(std::string_view text);

/// Applies `alias A ~ B` and `rename X -> Y` lines (comments and blanks allowed).
void load_mediation_text(std::string_view text, Schema& schema);

} // namespace lambdaq
