#include "lambdaq/store.hpp"

#include "lambdaq/error.hpp"
#include "text_util.hpp"

#include <algorithm>
#include <cctype>
#include <utility>

namespace lambdaq {

// ---------------------------------------------------------------------------
// GraphStore

bool GraphStore::has_entity(std::string_view type, std::string_view id) const {
    auto it = entities_.find(type);
    return it != entities_.end() && it->second.count(std::string(id));
}

std::vector<Value> GraphStore::entities(std::string_view type) const {
    std::vector<Value> out;
    if (auto it = entities_.find(type); it != entities_.end())
        for (const auto& id : it->second)
            out.push_back(Value::entity(std::string(type), id));
    return out;
}

Value GraphStore::lookup(const std::string& attr, const std::string& source_id) const {
    auto it = single_.find(attr);
    if (it == single_.end())
        return Undef{};
    auto jt = it->second.find(source_id);
    return jt == it->second.end() ? Value(Undef{}) : jt->second;
}

Value GraphStore::members(const std::string& attr, const std::string& source_id) const {
    auto it = multi_.find(attr);
    if (it == multi_.end())
        return Value::set({});
    auto jt = it->second.find(source_id);
    if (jt == it->second.end())
        return Value::set({});
    return Value::set({jt->second.begin(), jt->second.end()});
}

void GraphStore::add_entity(const std::string& type, const std::string& id) { entities_[type].insert(id); }

void GraphStore::set_single(const std::string& attr, const std::string& source_id, Value v) {
    single_[attr][source_id] = std::move(v);
}

void GraphStore::add_member(const std::string& attr, const std::string& source_id, Value v) {
    multi_[attr][source_id].insert(std::move(v));
}

std::vector<Row> GraphStore::rows(const AttributeDecl& attr) const {
    std::vector<Row> out;
    const auto& src_type = attr.type.args()[0].name();
    auto append = [&](const std::string& src, const Value& v) {
        Row row{Value::entity(src_type, src)};
        if (v.is_tuple())
            row.insert(row.end(), v.tuple_items().begin(), v.tuple_items().end());
        else
            row.push_back(v);
        out.push_back(std::move(row));
    };
    if (is_multivalued(attr.shape)) {
        if (auto it = multi_.find(attr.name); it != multi_.end())
            for (const auto& [src, set] : it->second)
                for (const auto& v : set)
                    append(src, v);
    } else if (auto it = single_.find(attr.name); it != single_.end()) {
        for (const auto& [src, v] : it->second)
            append(src, v);
    }
    std::sort(out.begin(), out.end());
    return out;
}

// ---------------------------------------------------------------------------
// RelStore

void RelStore::insert(const std::string& relation, Row row) { relations_[relation].insert(std::move(row)); }

const std::set<Row>& RelStore::tuples(const std::string& relation) const {
    static const std::set<Row> kEmpty;
    auto it = relations_.find(relation);
    return it == relations_.end() ? kEmpty : it->second;
}

bool RelStore::contains(const std::string& relation, const Row& row) const {
    return tuples(relation).count(row) > 0;
}

// ---------------------------------------------------------------------------
// Graph line format

namespace {

struct Literal {
    bool quoted = false;
    std::string text;
};

class LineCursor {
public:
    explicit LineCursor(std::string_view s) : s_(s) {}

    bool at_end() {
        skip_ws();
        return pos_ >= s_.size();
    }

    std::string word() {
        skip_ws();
        std::size_t start = pos_;
        while (pos_ < s_.size() && !std::isspace(static_cast<unsigned char>(s_[pos_])) && s_[pos_] != '{')
            ++pos_;
        if (start == pos_)
            throw Error(Errc::Syntax, "expected a word");
        return std::string(s_.substr(start, pos_ - start));
    }

    void expect(std::string_view tok) {
        skip_ws();
        if (s_.substr(pos_, tok.size()) != tok)
            throw Error(Errc::Syntax, "expected '" + std::string(tok) + "'");
        pos_ += tok.size();
    }

    bool peek(char c) {
        skip_ws();
        return pos_ < s_.size() && s_[pos_] == c;
    }

    /// `{Key: literal, ...}`; keys in written order.
    std::vector<std::pair<std::string, Literal>> props() {
        std::vector<std::pair<std::string, Literal>> out;
        expect("{");
        if (peek('}')) {
            ++pos_;
            return out;
        }
        while (true) {
            skip_ws();
            std::size_t start = pos_;
            while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_'))
                ++pos_;
            if (start == pos_)
                throw Error(Errc::Syntax, "expected a property name");
            std::string key(s_.substr(start, pos_ - start));
            expect(":");
            out.emplace_back(std::move(key), literal());
            if (peek(',')) {
                ++pos_;
                continue;
            }
            expect("}");
            return out;
        }
    }

private:
    std::string_view s_;
    std::size_t pos_ = 0;

    void skip_ws() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_])))
            ++pos_;
    }

    Literal literal() {
        skip_ws();
        Literal lit;
        if (pos_ < s_.size() && s_[pos_] == '"') {
            lit.quoted = true;
            ++pos_;
            while (pos_ < s_.size() && s_[pos_] != '"') {
                if (s_[pos_] == '\\' && pos_ + 1 < s_.size())
                    ++pos_;
                lit.text += s_[pos_++];
            }
            if (pos_ >= s_.size())
                throw Error(Errc::Syntax, "unterminated string literal");
            ++pos_;
            return lit;
        }
        std::size_t start = pos_;
        while (pos_ < s_.size() && s_[pos_] != ',' && s_[pos_] != '}')
            ++pos_;
        lit.text = std::string(detail::trim(s_.substr(start, pos_ - start)));
        if (lit.text.empty())
            throw Error(Errc::Syntax, "expected a literal");
        return lit;
    }
};

Value convert_literal(const Literal& lit, Carrier carrier, std::string_view what) {
    auto mismatch = [&]() {
        return Error(Errc::TypeMismatch, "literal '" + lit.text + "' is not a " + std::string(to_string(carrier)) +
                                             " value for " + std::string(what));
    };
    if (carrier == Carrier::String) {
        if (!lit.quoted)
            throw mismatch();
        return lit.text;
    }
    if (lit.quoted)
        throw mismatch();
    switch (carrier) {
    case Carrier::Number:
        if (auto n = Number::parse(lit.text)) return *n;
        break;
    case Carrier::Bool:
        if (lit.text == "true") return true;
        if (lit.text == "false") return false;
        break;
    case Carrier::Date:
        if (auto d = Date::parse(lit.text)) return *d;
        break;
    case Carrier::String: break;
    }
    throw mismatch();
}

/// Builds the descriptive components in declared order from a property map.
std::vector<Value> props_for(const Schema& schema, std::span<const std::string> bases,
                             const std::vector<std::pair<std::string, Literal>>& props, std::string_view what) {
    std::vector<Value> out;
    for (const auto& [key, lit] : props)
        if (std::find(bases.begin(), bases.end(), key) == bases.end())
            throw Error(Errc::UnknownAttribute, "'" + key + "' is not a property of " + std::string(what));
    for (const auto& base : bases) {
        auto it = std::find_if(props.begin(), props.end(), [&](const auto& p) { return p.first == base; });
        if (it == props.end())
            throw Error(Errc::TypeMismatch, "missing property '" + base + "' of " + std::string(what));
        if (std::count_if(props.begin(), props.end(), [&](const auto& p) { return p.first == base; }) > 1)
            throw Error(Errc::DuplicateName, "property '" + base + "' given twice");
        out.push_back(convert_literal(it->second, *schema.base(base).carrier, what));
    }
    return out;
}

struct PendingLine {
    int line_no;
    std::string_view text;
};

template <class Fn>
void with_line(int line_no, Fn&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        throw Error(e.code(), e.message(), std::nullopt, line_no);
    }
}

void load_node(GraphStore& g, const Schema& schema, LineCursor& cur) {
    std::string type = cur.word();
    std::string id = cur.word();
    if (!schema.is_entity(type))
        throw Error(Errc::UnknownEntityType, "'" + type + "' is not an entity type");
    g.add_entity(type, id);
    if (cur.at_end())
        return;
    auto props = cur.props();
    if (!cur.at_end())
        throw Error(Errc::Syntax, "trailing text after properties");
    if (props.empty())
        return;
    const auto* attr = schema.node_props_for(type);
    if (!attr)
        throw Error(Errc::UnknownAttribute, "entity type '" + type + "' has no node properties");
    auto layout = schema.row_layout(*attr);
    std::span<const std::string> bases(layout.begin() + 1, layout.end());
    auto values = props_for(schema, bases, props, attr->name);
    g.set_single(attr->name, id, values.size() == 1 && attr->type.result().is_base()
                                     ? values.front()
                                     : Value::tuple(std::move(values)));
}

void load_edge(GraphStore& g, const Schema& schema, LineCursor& cur) {
    const auto& attr = schema.resolve_attribute(cur.word());
    if (attr.source != Source::Graph || attr.shape == Shape::NodeProps)
        throw Error(Errc::WrongShape, "'" + attr.name + "' is not an edge attribute");
    std::string src = cur.word();
    cur.expect("->");
    std::string dst = cur.word();
    std::vector<std::pair<std::string, Literal>> props;
    if (!cur.at_end())
        props = cur.props();
    if (!cur.at_end())
        throw Error(Errc::Syntax, "trailing text after properties");

    auto layout = schema.row_layout(attr);
    const auto& src_type = layout.front();
    const auto& dst_type = layout.back();
    if (!g.has_entity(src_type, src))
        throw Error(Errc::UnknownEntityType, "unknown " + src_type + " node '" + src + "'");
    if (!g.has_entity(dst_type, dst))
        throw Error(Errc::UnknownEntityType, "unknown " + dst_type + " node '" + dst + "'");

    std::span<const std::string> desc(layout.begin() + 1, layout.end() - 1);
    auto values = props_for(schema, desc, props, attr.name);
    Value target = Value::entity(dst_type, dst);
    Value member = target;
    if (!values.empty() || attr.shape == Shape::EdgeSingle) {
        values.push_back(target);
        member = Value::tuple(std::move(values));
    }
    if (is_multivalued(attr.shape))
        g.add_member(attr.name, src, std::move(member));
    else
        g.set_single(attr.name, src, std::move(member));
}

} // namespace

void GraphStore::load(std::string_view text, const Schema& schema) {
    std::vector<PendingLine> edges;
    int line_no = 0;
    for (auto raw : detail::split_lines(text)) {
        ++line_no;
        auto line = detail::trim(detail::strip_comment(raw));
        if (line.empty())
            continue;
        with_line(line_no, [&] {
            if (detail::starts_with_word(line, "node")) {
                LineCursor cur(line.substr(4));
                load_node(*this, schema, cur);
            } else if (detail::starts_with_word(line, "edge")) {
                edges.push_back({line_no, line.substr(4)});
            } else {
                throw Error(Errc::Syntax, "expected 'node' or 'edge'");
            }
        });
    }
    for (const auto& e : edges)
        with_line(e.line_no, [&] {
            LineCursor cur(e.text);
            load_edge(*this, schema, cur);
        });
}

GraphStore load_graph_lines(std::string_view text, const Schema& schema) {
    GraphStore g;
    g.load(text, schema);
    return g;
}

Value parse_data_literal(std::string_view text, Carrier carrier) {
    Literal lit;
    text = detail::trim(text);
    if (text.size() >= 2 && text.front() == '"' && text.back() == '"') {
        lit.quoted = true;
        lit.text = std::string(text.substr(1, text.size() - 2));
    } else {
        lit.text = std::string(text);
    }
    return convert_literal(lit, carrier, "literal");
}

// ---------------------------------------------------------------------------
// CSV

std::vector<std::vector<std::string>> parse_csv(std::string_view text) {
    std::vector<std::vector<std::string>> records;
    std::vector<std::string> record;
    std::string field;
    bool in_quotes = false;
    bool field_started = false;
    auto end_field = [&] {
        record.push_back(std::move(field));
        field.clear();
        field_started = false;
    };
    auto end_record = [&] {
        end_field();
        if (!(record.size() == 1 && record[0].empty()))
            records.push_back(std::move(record));
        record.clear();
    };
    for (std::size_t i = 0; i < text.size(); ++i) {
        char c = text[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                field += c;
            }
            continue;
        }
        if (c == '"' && !field_started) {
            in_quotes = true;
            field_started = true;
        } else if (c == ',') {
            end_field();
        } else if (c == '\n') {
            end_record();
        } else if (c == '\r') {
            // tolerated before '\n'
        } else {
            field += c;
            field_started = true;
        }
    }
    if (in_quotes)
        throw Error(Errc::Syntax, "unterminated quoted CSV field");
    if (field_started || !field.empty() || !record.empty())
        end_record();
    return records;
}

void load_relation_csv(std::string_view relation, std::string_view csv, const Schema& schema, RelStore& into) {
    const auto& attr = schema.resolve_attribute(relation);
    if (attr.shape != Shape::Relation)
        throw Error(Errc::WrongShape, "'" + attr.name + "' is not a relation");
    auto columns = schema.row_layout(attr);
    auto records = parse_csv(csv);
    if (records.empty() || records.front() != columns) {
        std::string expected;
        for (const auto& c : columns)
            expected += (expected.empty() ? "" : ",") + c;
        throw Error(Errc::HeaderMismatch, "header of '" + attr.name + "' must be " + expected, std::nullopt, 1);
    }
    std::vector<Row> rows;
    for (std::size_t r = 1; r < records.size(); ++r) {
        const auto& rec = records[r];
        int row_no = static_cast<int>(r + 1);
        if (rec.size() != columns.size())
            throw Error(Errc::ArityMismatch,
                        "expected " + std::to_string(columns.size()) + " fields, got " + std::to_string(rec.size()),
                        std::nullopt, row_no);
        Row row;
        for (std::size_t c = 0; c < rec.size(); ++c) {
            Carrier carrier = *schema.base(columns[c]).carrier;
            Literal lit{carrier == Carrier::String, rec[c]};
            with_line(row_no, [&] { row.push_back(convert_literal(lit, carrier, attr.name + "." + columns[c])); });
        }
        rows.push_back(std::move(row));
    }
    for (auto& row : rows)
        into.insert(attr.name, std::move(row));
}

// ---------------------------------------------------------------------------
// Access

Value lookup_single(const Stores& stores, const Schema& schema, std::string_view attr_name, const Value& arg) {
    const auto& attr = schema.resolve_attribute(attr_name);
    if (attr.source != Source::Graph || is_multivalued(attr.shape))
        throw Error(Errc::WrongShape, "'" + attr.name + "' is not single-valued");
    if (arg.is_undef())
        return Undef{};
    if (!schema.validate_value(arg, attr.type.args()[0]))
        throw Error(Errc::TypeMismatch, "argument of '" + attr.name + "' must be " + render_type(attr.type.args()[0]));
    return stores.graph.lookup(attr.name, arg.as_entity().id);
}

bool test_membership(const Stores& stores, const Schema& schema, std::string_view attr_name, const Row& row) {
    const auto& attr = schema.resolve_attribute(attr_name);
    if (!is_multivalued(attr.shape))
        throw Error(Errc::WrongShape, "'" + attr.name + "' is not a characteristic function");
    auto layout = schema.row_layout(attr);
    if (row.size() != layout.size())
        throw Error(Errc::ArityMismatch, "'" + attr.name + "' expects " + std::to_string(layout.size()) + " values");
    for (std::size_t i = 0; i < row.size(); ++i) {
        if (row[i].is_undef())
            return false;
        if (!schema.validate_value(row[i], TypeExpr::base(layout[i])))
            throw Error(Errc::TypeMismatch, "component " + std::to_string(i + 1) + " of '" + attr.name +
                                                "' must be " + layout[i]);
    }
    if (attr.shape == Shape::Relation)
        return stores.rel.contains(attr.name, row);
    Value member = row.size() == 2 ? row[1] : Value::tuple({row.begin() + 1, row.end()});
    return stores.graph.members(attr.name, row[0].as_entity().id).set_contains(member);
}

std::vector<Row> scan_rows(const Stores& stores, const Schema&, const AttributeDecl& attr) {
    if (attr.source == Source::Relational) {
        const auto& t = stores.rel.tuples(attr.name);
        return {t.begin(), t.end()};
    }
    return stores.graph.rows(attr);
}

std::vector<Value> active_domain(std::string_view base, std::span<const Value> extra, const Stores& stores,
                                 const Schema& schema) {
    const auto& b = schema.base(base);
    std::vector<Value> out(extra.begin(), extra.end());
    if (b.kind == BaseKind::Entity) {
        auto ents = stores.graph.entities(base);
        out.insert(out.end(), ents.begin(), ents.end());
    } else {
        auto cls = schema.alias_class(base);
        for (const auto& attr : schema.attributes()) {
            auto layout = schema.row_layout(attr);
            std::vector<std::size_t> cols;
            for (std::size_t i = 0; i < layout.size(); ++i)
                if (std::find(cls.begin(), cls.end(), layout[i]) != cls.end())
                    cols.push_back(i);
            if (cols.empty())
                continue;
            for (const auto& row : scan_rows(stores, schema, attr))
                for (auto c : cols)
                    out.push_back(row[c]);
        }
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

void check_integrity(const Stores& stores, const Schema& schema) {
    for (const auto& attr : schema.attributes()) {
        auto layout = schema.row_layout(attr);
        for (const auto& row : scan_rows(stores, schema, attr)) {
            for (std::size_t i = 0; i < row.size(); ++i) {
                if (!schema.validate_value(row[i], TypeExpr::base(layout[i])))
                    throw Error(Errc::TypeMismatch, "ill-typed value in '" + attr.name + "'");
                if (row[i].is_entity() && !stores.graph.has_entity(row[i].as_entity().type, row[i].as_entity().id))
                    throw Error(Errc::UnknownEntityType, "'" + attr.name + "' mentions undeclared node '" +
                                                             row[i].as_entity().id + "'");
            }
        }
    }
}

} // namespace lambdaq
