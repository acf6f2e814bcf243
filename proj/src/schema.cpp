#include "lambdaq/schema.hpp"

#include "lambdaq/error.hpp"
#include "text_util.hpp"

#include <algorithm>
#include <set>

namespace lambdaq {

std::string_view to_string(Source s) { return s == Source::Graph ? "graph" : "relational"; }

std::string_view to_string(Shape s) {
    switch (s) {
    case Shape::NodeProps: return "node_props";
    case Shape::EdgeSingle: return "edge_single";
    case Shape::EdgeMulti: return "edge_multi";
    case Shape::EdgePlain: return "edge_plain";
    case Shape::EdgePlainMulti: return "edge_plain_multi";
    case Shape::Relation: return "relation";
    }
    return "?";
}

bool is_multivalued(Shape s) {
    return s == Shape::EdgeMulti || s == Shape::EdgePlainMulti || s == Shape::Relation;
}

Schema::Schema() {
    for (auto c : {Carrier::Bool, Carrier::Number, Carrier::String, Carrier::Date})
        declare_base(BaseType{std::string(to_string(c)), BaseKind::Descriptive, c});
}

bool Schema::is_builtin(std::string_view name) const {
    return carrier_from_string(name).has_value();
}

void Schema::declare_base(BaseType b) {
    if (!is_identifier(b.name))
        throw Error(Errc::Syntax, "bad base name '" + b.name + "'");
    if (b.kind == BaseKind::Entity && b.carrier)
        throw Error(Errc::TypeMismatch, "entity type '" + b.name + "' cannot have a carrier");
    if (b.kind == BaseKind::Descriptive && !b.carrier)
        throw Error(Errc::TypeMismatch, "descriptive type '" + b.name + "' needs a carrier");
    if (auto it = base_index_.find(b.name); it != base_index_.end()) {
        // Redeclaring a built-in with its own carrier is harmless.
        if (is_builtin(b.name) && bases_[it->second] == b)
            return;
        throw Error(Errc::DuplicateName, "base type '" + b.name + "' already declared");
    }
    base_index_.emplace(b.name, bases_.size());
    bases_.push_back(std::move(b));
}

const BaseType* Schema::find_base(std::string_view name) const {
    auto it = base_index_.find(name);
    return it == base_index_.end() ? nullptr : &bases_[it->second];
}

const BaseType& Schema::base(std::string_view name) const {
    if (const auto* b = find_base(name))
        return *b;
    throw Error(Errc::UnknownBase, "unknown base type '" + std::string(name) + "'");
}

bool Schema::is_entity(std::string_view name) const {
    const auto* b = find_base(name);
    return b && b->kind == BaseKind::Entity;
}

bool Schema::is_descriptive(std::string_view name) const {
    const auto* b = find_base(name);
    return b && b->kind == BaseKind::Descriptive;
}

void Schema::check_type(const TypeExpr& t) const {
    for (const auto& name : base_names(t))
        base(name);
}

TypeExpr Schema::parse_type(std::string_view text) const {
    TypeExpr t = lambdaq::parse_type(text);
    check_type(t);
    return t;
}

Shape Schema::classify(const TypeExpr& t) const {
    check_type(t);
    auto no_match = [&]() -> Error {
        return Error(Errc::NoShapeMatch, "type " + render_type(t) + " fits no attribute shape");
    };
    auto desc = [&](const TypeExpr& x) { return x.is_base() && is_descriptive(x.name()); };
    auto entity = [&](const TypeExpr& x) { return x.is_base() && is_entity(x.name()); };
    // Descriptive components followed by exactly one trailing entity.
    auto desc_then_entity = [&](std::span<const TypeExpr> xs) {
        return !xs.empty() && entity(xs.back()) &&
               std::all_of(xs.begin(), xs.end() - 1, desc);
    };

    if (!t.is_func())
        throw no_match();
    const auto& result = t.result();
    auto args = t.args();

    if (result.is_base() && result.name() == kBoolBase && std::all_of(args.begin(), args.end(), desc))
        return Shape::Relation;
    if (args.size() != 1 || !entity(args[0]))
        throw no_match();

    if (result.is_base())
        return entity(result) ? Shape::EdgePlain : Shape::NodeProps;
    if (result.is_tuple()) {
        auto comps = result.components();
        if (desc_then_entity(comps))
            return Shape::EdgeSingle;
        if (std::all_of(comps.begin(), comps.end(), desc))
            return Shape::NodeProps;
        throw no_match();
    }
    const auto& inner = result.result();
    if (inner.is_base() && inner.name() == kBoolBase && desc_then_entity(result.args()))
        return result.args().size() == 1 ? Shape::EdgePlainMulti : Shape::EdgeMulti;
    throw no_match();
}

const AttributeDecl& Schema::declare_attribute(std::string name, TypeExpr type, Source source) {
    if (!is_identifier(name))
        throw Error(Errc::Syntax, "bad attribute name '" + name + "'");
    if (attr_index_.count(name))
        throw Error(Errc::DuplicateName, "attribute '" + name + "' already declared");
    for (const auto& [ext, canon] : mediation_.attr_renames)
        if (ext == name)
            throw Error(Errc::DuplicateName, "'" + name + "' is already a renamed external name");
    Shape shape = classify(type);
    if ((shape == Shape::Relation) != (source == Source::Relational))
        throw Error(Errc::SourceShapeMismatch,
                    "attribute '" + name + "' of shape " + std::string(to_string(shape)) +
                        " cannot live in the " + std::string(to_string(source)) + " source");
    if (shape == Shape::NodeProps) {
        const auto& entity = type.args()[0].name();
        if (const auto* other = node_props_for(entity))
            throw Error(Errc::DuplicateName, "entity type '" + entity +
                                                 "' already has node properties '" + other->name + "'");
    }
    attr_index_.emplace(name, attributes_.size());
    attributes_.push_back(AttributeDecl{std::move(name), std::move(type), source, shape});
    return attributes_.back();
}

const AttributeDecl* Schema::find_attribute(std::string_view canonical) const {
    auto it = attr_index_.find(canonical);
    return it == attr_index_.end() ? nullptr : &attributes_[it->second];
}

std::string Schema::canonical_name(std::string_view name) const {
    for (const auto& [ext, canon] : mediation_.attr_renames)
        if (ext == name)
            return canon;
    return std::string(name);
}

NameRef Schema::resolve_name(std::string_view name) const {
    std::string canon = canonical_name(name);
    if (const auto* a = find_attribute(canon))
        return NameRef{a, nullptr};
    if (const auto* b = find_base(canon))
        return NameRef{nullptr, b};
    throw Error(Errc::UnknownName, "unknown name '" + std::string(name) + "'");
}

const AttributeDecl& Schema::resolve_attribute(std::string_view name) const {
    if (const auto* a = find_attribute(canonical_name(name)))
        return *a;
    throw Error(Errc::UnknownAttribute, "unknown attribute '" + std::string(name) + "'");
}

void Schema::add_alias(const std::string& a, const std::string& b) {
    const auto& ba = base(a);
    const auto& bb = base(b);
    if (ba.kind != BaseKind::Descriptive || bb.kind != BaseKind::Descriptive)
        throw Error(Errc::InvalidMediation, "alias " + a + " ~ " + b + ": only descriptive types can be aliased");
    if (ba.carrier != bb.carrier)
        throw Error(Errc::InvalidMediation, "alias " + a + " ~ " + b + ": carriers differ");
    if (a == b || compatible(a, b))
        return;
    mediation_.type_aliases.emplace_back(a, b);
}

void Schema::add_rename(const std::string& external, const std::string& canonical) {
    if (!is_identifier(external))
        throw Error(Errc::Syntax, "bad name '" + external + "'");
    if (!find_attribute(canonical))
        throw Error(Errc::UnknownAttribute, "rename target '" + canonical + "' is not an attribute");
    if (find_attribute(external))
        throw Error(Errc::DuplicateName, "rename source '" + external + "' is already an attribute");
    for (const auto& [ext, canon] : mediation_.attr_renames) {
        if (ext == external && canon == canonical)
            return;
        if (ext == external)
            throw Error(Errc::InvalidMediation, "'" + external + "' is already renamed to '" + canon + "'");
        if (canon == canonical)
            throw Error(Errc::InvalidMediation,
                        "renaming must be injective: '" + canonical + "' already has external name '" + ext + "'");
    }
    mediation_.attr_renames.emplace_back(external, canonical);
}

std::vector<std::string> Schema::alias_class(std::string_view start) const {
    std::set<std::string, std::less<>> seen{std::string(start)};
    std::vector<std::string> frontier{std::string(start)};
    while (!frontier.empty()) {
        std::string cur = std::move(frontier.back());
        frontier.pop_back();
        for (const auto& [a, b] : mediation_.type_aliases) {
            const std::string* other = a == cur ? &b : (b == cur ? &a : nullptr);
            if (other && seen.insert(*other).second)
                frontier.push_back(*other);
        }
    }
    return {seen.begin(), seen.end()};
}

bool Schema::compatible(std::string_view a, std::string_view b) const {
    if (a == b)
        return true;
    auto cls = alias_class(a);
    return std::find(cls.begin(), cls.end(), b) != cls.end();
}

const AttributeDecl* Schema::node_props_for(std::string_view entity) const {
    for (const auto& a : attributes_)
        if (a.shape == Shape::NodeProps && a.type.args()[0].name() == entity)
            return &a;
    return nullptr;
}

std::vector<std::string> Schema::row_layout(const AttributeDecl& attr) const {
    std::vector<std::string> out;
    const auto& t = attr.type;
    if (attr.shape == Shape::Relation) {
        for (const auto& a : t.args())
            out.push_back(a.name());
        return out;
    }
    out.push_back(t.args()[0].name());
    const auto& r = t.result();
    switch (attr.shape) {
    case Shape::NodeProps:
    case Shape::EdgeSingle:
        if (r.is_base())
            out.push_back(r.name());
        else
            for (const auto& c : r.components())
                out.push_back(c.name());
        break;
    case Shape::EdgePlain: out.push_back(r.name()); break;
    case Shape::EdgeMulti:
    case Shape::EdgePlainMulti:
        for (const auto& a : r.args())
            out.push_back(a.name());
        break;
    case Shape::Relation: break;
    }
    return out;
}

bool Schema::validate_value(const Value& v, const TypeExpr& t) const {
    switch (t.kind()) {
    case TypeExpr::Kind::Base: {
        const auto* b = find_base(t.name());
        if (!b)
            return false;
        if (b->kind == BaseKind::Entity)
            return v.is_entity() && v.as_entity().type == b->name;
        switch (*b->carrier) {
        case Carrier::String: return v.is_string();
        case Carrier::Number: return v.is_number();
        case Carrier::Bool: return v.is_bool();
        case Carrier::Date: return v.is_date();
        }
        return false;
    }
    case TypeExpr::Kind::Tuple: {
        auto comps = t.components();
        if (!v.is_tuple() || v.tuple_items().size() != comps.size())
            return false;
        for (std::size_t i = 0; i < comps.size(); ++i)
            if (!validate_value(v.tuple_items()[i], comps[i]))
                return false;
        return true;
    }
    case TypeExpr::Kind::Func: {
        if (!v.is_set() || !t.result().is_base() || t.result().name() != kBoolBase)
            return false;
        auto args = t.args();
        for (const auto& e : v.set_items()) {
            if (args.size() == 1) {
                if (!validate_value(e, args[0]))
                    return false;
            } else if (!validate_value(e, TypeExpr::tuple({args.begin(), args.end()}))) {
                return false;
            }
        }
        return true;
    }
    }
    return false;
}

std::string Schema::render() const {
    std::string out;
    for (const auto& b : bases_) {
        if (is_builtin(b.name) && b.carrier && to_string(*b.carrier) == b.name)
            continue;
        if (b.kind == BaseKind::Entity)
            out += "entity " + b.name + "\n";
        else
            out += "descriptive " + b.name + ": " + std::string(to_string(*b.carrier)) + "\n";
    }
    for (const auto& a : attributes_)
        out += a.name + "/" + render_type(a.type) + " @" + std::string(to_string(a.source)) + "\n";
    for (const auto& [x, y] : mediation_.type_aliases)
        out += "alias " + x + " ~ " + y + "\n";
    for (const auto& [x, y] : mediation_.attr_renames)
        out += "rename " + x + " -> " + y + "\n";
    return out;
}

bool Schema::operator==(const Schema& other) const {
    return bases_ == other.bases_ && attributes_ == other.attributes_ && mediation_ == other.mediation_;
}

namespace {

/// Returns true if the line was a mediation statement.
bool apply_mediation_line(std::string_view line, Schema& schema) {
    using detail::trim;
    if (detail::starts_with_word(line, "alias")) {
        auto rest = trim(line.substr(5));
        auto tilde = rest.find('~');
        if (tilde == std::string_view::npos)
            throw Error(Errc::Syntax, "expected 'alias A ~ B'");
        schema.add_alias(std::string(trim(rest.substr(0, tilde))), std::string(trim(rest.substr(tilde + 1))));
        return true;
    }
    if (detail::starts_with_word(line, "rename")) {
        auto rest = trim(line.substr(6));
        auto arrow = rest.find("->");
        if (arrow == std::string_view::npos)
            throw Error(Errc::Syntax, "expected 'rename X -> Y'");
        schema.add_rename(std::string(trim(rest.substr(0, arrow))), std::string(trim(rest.substr(arrow + 2))));
        return true;
    }
    return false;
}

void apply_schema_line(std::string_view line, Schema& schema) {
    using detail::trim;
    if (apply_mediation_line(line, schema))
        return;
    if (detail::starts_with_word(line, "entity")) {
        schema.declare_base(BaseType{std::string(trim(line.substr(6))), BaseKind::Entity, std::nullopt});
        return;
    }
    if (detail::starts_with_word(line, "descriptive")) {
        auto rest = trim(line.substr(11));
        auto colon = rest.find(':');
        if (colon == std::string_view::npos)
            throw Error(Errc::Syntax, "expected 'descriptive Name: Carrier'");
        auto carrier_text = trim(rest.substr(colon + 1));
        auto carrier = carrier_from_string(carrier_text);
        if (!carrier)
            throw Error(Errc::Syntax, "unknown carrier '" + std::string(carrier_text) + "'");
        schema.declare_base(BaseType{std::string(trim(rest.substr(0, colon))), BaseKind::Descriptive, carrier});
        return;
    }
    auto slash = line.find('/');
    if (slash == std::string_view::npos)
        throw Error(Errc::Syntax, "unrecognized schema line '" + std::string(line) + "'");
    auto name = trim(line.substr(0, slash));
    auto rest = trim(line.substr(slash + 1));
    std::optional<Source> source;
    if (auto at = rest.rfind('@'); at != std::string_view::npos) {
        auto tag = trim(rest.substr(at + 1));
        if (tag == "graph")
            source = Source::Graph;
        else if (tag == "relational")
            source = Source::Relational;
        else
            throw Error(Errc::Syntax, "unknown source tag '@" + std::string(tag) + "'");
        rest = trim(rest.substr(0, at));
    }
    TypeExpr type = schema.parse_type(rest);
    if (!source)
        source = schema.classify(type) == Shape::Relation ? Source::Relational : Source::Graph;
    schema.declare_attribute(std::string(name), std::move(type), *source);
}

template <class Fn>
void for_each_statement(std::string_view text, Fn&& fn) {
    int line_no = 0;
    for (auto raw : detail::split_lines(text)) {
        ++line_no;
        auto line = detail::trim(detail::strip_comment(raw));
        if (line.empty())
            continue;
        try {
            fn(line);
        } catch (const Error& e) {
            throw Error(e.code(), e.message(), std::nullopt, line_no);
        }
    }
}

} // namespace

Schema load_schema_text(std::string_view text) {
    Schema schema;
    for_each_statement(text, [&](std::string_view line) { apply_schema_line(line, schema); });
    return schema;
}

void load_mediation_text(std::string_view text, Schema& schema) {
    for_each_statement(text, [&](std::string_view line) {
        if (!apply_mediation_line(line, schema))
            throw Error(Errc::Syntax, "expected an alias or rename statement");
    });
}

} // namespace lambdaq
