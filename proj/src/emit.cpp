#include "lambdaq/error.hpp"
#include "lambdaq/translate.hpp"

#include <map>

namespace lambdaq {

namespace {

void require_source(const Term& t, const Schema& schema, Source wanted, std::string_view target) {
    if (t.kind == TermKind::AttrRef) {
        const AttributeDecl& attr = schema.resolve_attribute(t.name);
        if (attr.source != wanted)
            throw Error(Errc::UnsupportedConstruct,
                        std::string(to_string(attr.source)) + " attribute '" + attr.name + "' cannot be emitted as " +
                            std::string(target),
                        t.span);
    }
    for (const auto& k : t.kids)
        require_source(k, schema, wanted, target);
}

std::string_view op_text(CmpOp op) { return to_string(op); }

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i)
            out += sep;
        out += parts[i];
    }
    return out;
}

std::string quote(const std::string& s, char esc) {
    std::string out = "'";
    for (char c : s) {
        if (c == '\'')
            out += esc;
        out += c;
    }
    return out + "'";
}

/// Shared rendering of conditions; the dialects differ in columns and literals.
class Writer {
public:
    virtual ~Writer() = default;

protected:
    virtual std::string column(const Expr& e) = 0;
    virtual std::string literal(const Value& v) = 0;
    virtual std::string not_exists(const Block& b) = 0;
    virtual std::string in_domain(const Cond& c) = 0;
    virtual std::string count(const Expr& e) = 0;

    std::string expr(const Expr& e) {
        switch (e.kind) {
        case Expr::Kind::Column: return column(e);
        case Expr::Kind::Const: return literal(e.value);
        case Expr::Kind::Arith:
            return "(" + expr(e.kids[0]) + " " + std::string(to_string(e.op)) + " " + expr(e.kids[1]) + ")";
        case Expr::Kind::Count: return count(e);
        }
        return "";
    }

    /// Empty when the condition is trivially true.
    std::string cond(const Cond& c) {
        switch (c.kind) {
        case Cond::Kind::False: return false_text();
        case Cond::Kind::InDomain: return in_domain(c);
        case Cond::Kind::NotExists: return not_exists(*c.sub);
        case Cond::Kind::Compare: {
            std::string a = expr(c.lhs);
            std::string b = expr(c.rhs);
            if (c.op == CmpOp::Eq && a == b)
                return "";
            return a + " " + std::string(op_text(c.op)) + " " + b;
        }
        case Cond::Kind::NotCompare: {
            std::string a = expr(c.lhs);
            std::string b = expr(c.rhs);
            if (c.op == CmpOp::Eq)
                return a + " <> " + b;
            return "NOT (" + a + " " + std::string(op_text(c.op)) + " " + b + ")";
        }
        }
        return "";
    }

    virtual std::string false_text() = 0;

    std::vector<std::string> conds(const Block& b, const std::set<std::size_t>& skip = {}) {
        std::vector<std::string> out;
        for (std::size_t i = 0; i < b.conds.size(); ++i) {
            if (skip.contains(i))
                continue;
            std::string s = cond(b.conds[i]);
            if (!s.empty())
                out.push_back(std::move(s));
        }
        return out;
    }
};

// ---------------------------------------------------------------------------

class SqlWriter : public Writer {
public:
    explicit SqlWriter(const Schema& schema) : schema_(schema) {}

    std::string query(const CompiledQuery& q) {
        register_scans(q.block);
        std::vector<std::string> items;
        for (const auto& [name, e] : q.outputs) {
            std::string s = expr(e);
            if (e.kind != Expr::Kind::Column)
                s += " AS " + name;
            items.push_back(std::move(s));
        }
        return "SELECT DISTINCT " + join(items, ", ") + from_where(q.block);
    }

private:
    const Schema& schema_;
    struct Table {
        std::string relation;
        std::vector<std::string> columns;
    };
    std::map<int, Table> tables_;

    /// First relation column holding values of `base` or an alias of it.
    std::optional<std::pair<std::string, std::string>> domain_source(const std::string& base) const {
        for (const auto& attr : schema_.attributes()) {
            if (attr.shape != Shape::Relation)
                continue;
            for (const auto& col : schema_.row_layout(attr))
                if (schema_.compatible(col, base))
                    return std::make_pair(attr.name, col);
        }
        return std::nullopt;
    }

    void register_scans(const Block& b) {
        for (const auto& s : b.scans) {
            if (s.kind == Scan::Kind::Attribute) {
                tables_[s.id] = {s.name, s.layout};
            } else {
                auto src = domain_source(s.name);
                if (!src)
                    throw Error(Errc::UnsupportedConstruct, "no relation holds values of " + s.name);
                tables_[s.id] = {src->first, {src->second}};
            }
        }
        for (const auto& c : b.conds)
            if (c.sub)
                register_scans(*c.sub);
        for (const auto& [name, e] : b.vars)
            if (e.sub)
                register_scans(*e.sub);
    }

    std::string from_where(const Block& b) {
        std::string out;
        std::vector<std::string> from;
        for (const auto& s : b.scans)
            from.push_back(tables_.at(s.id).relation + " t" + std::to_string(s.id));
        if (!from.empty())
            out += " FROM " + join(from, ", ");
        auto cs = conds(b);
        if (!cs.empty())
            out += " WHERE " + join(cs, " AND ");
        return out;
    }

    std::string column(const Expr& e) override {
        return "t" + std::to_string(e.scan) + "." + tables_.at(e.scan).columns.at(static_cast<std::size_t>(e.col));
    }

    std::string literal(const Value& v) override {
        if (v.is_string())
            return quote(v.as_string(), '\'');
        if (v.is_entity())
            return quote(v.as_entity().id, '\'');
        if (v.is_date())
            return "DATE '" + display(v) + "'";
        if (v.is_bool())
            return v.as_bool() ? "TRUE" : "FALSE";
        return display(v);
    }

    std::string not_exists(const Block& b) override {
        if (b.scans.empty()) {
            auto cs = conds(b);
            return cs.empty() ? false_text() : "NOT (" + join(cs, " AND ") + ")";
        }
        return "NOT EXISTS (SELECT 1" + from_where(b) + ")";
    }

    std::string in_domain(const Cond& c) override {
        auto src = domain_source(c.base);
        if (!src)
            throw Error(Errc::UnsupportedConstruct, "no relation holds values of " + c.base);
        return expr(c.lhs) + " IN (SELECT " + src->second + " FROM " + src->first + ")";
    }

    std::string count(const Expr& e) override {
        return "(SELECT COUNT(DISTINCT " + expr(e.kids[0]) + ")" + from_where(*e.sub) + ")";
    }

    std::string false_text() override { return "1 = 0"; }
};

// ---------------------------------------------------------------------------

class CypherWriter : public Writer {
public:
    CypherWriter(const Schema& schema, std::set<std::string> taken) : schema_(schema), taken_(std::move(taken)) {}

    std::string query(const CompiledQuery& q) {
        auto [patterns, cs] = block_parts(q.block);
        if (patterns.empty())
            throw Error(Errc::UnsupportedConstruct, "query binds no graph node");
        std::vector<std::string> items;
        for (const auto& [name, e] : q.outputs) {
            if (e.kind == Expr::Kind::Count)
                throw Error(Errc::UnsupportedConstruct, "COUNT is computed by the mediator, not in Cypher");
            std::string s = expr(e);
            if (s != name)
                s += " AS " + name;
            items.push_back(std::move(s));
        }
        std::string out = "MATCH " + join(patterns, ", ");
        if (!cs.empty())
            out += " WHERE " + join(cs, " AND ");
        return out + " RETURN DISTINCT " + join(items, ", ");
    }

private:
    const Schema& schema_;
    std::set<std::string> taken_;
    std::map<std::pair<int, int>, std::string> nodes_;
    std::map<int, std::string> rels_;
    std::map<int, const Scan*> scans_;
    std::set<std::string> declared_;
    int node_counter_ = 0;
    int rel_counter_ = 0;

    std::string fresh(const char* prefix, int& counter) {
        while (true) {
            std::string n = prefix + std::to_string(++counter);
            if (taken_.insert(n).second)
                return n;
        }
    }

    bool is_node_col(const Scan& s, std::size_t col) const { return schema_.is_entity(s.layout[col]); }

    std::string node_name(const Block& b, const Scan& s, int col, std::set<std::size_t>& skip) {
        Expr self = Expr::column(s.id, col);
        for (const auto& [var, e] : b.vars)
            if (e.kind == Expr::Kind::Column && e.scan == s.id && e.col == col)
                return var;
        for (std::size_t i = 0; i < b.conds.size(); ++i) {
            const Cond& c = b.conds[i];
            if (c.kind != Cond::Kind::Compare || c.op != CmpOp::Eq)
                continue;
            const Expr* other = nullptr;
            if (c.lhs.kind == Expr::Kind::Column && c.lhs.scan == s.id && c.lhs.col == col)
                other = &c.rhs;
            else if (c.rhs.kind == Expr::Kind::Column && c.rhs.scan == s.id && c.rhs.col == col)
                other = &c.lhs;
            if (!other || other->kind != Expr::Kind::Column)
                continue;
            auto it = nodes_.find({other->scan, other->col});
            if (it != nodes_.end()) {
                skip.insert(i);
                return it->second;
            }
        }
        return fresh("n", node_counter_);
    }

    std::string node_pattern(const std::string& name, const std::string& label) {
        if (declared_.insert(name).second)
            return "(" + name + ":" + label + ")";
        return "(" + name + ")";
    }

    std::pair<std::vector<std::string>, std::vector<std::string>> block_parts(const Block& b) {
        std::vector<std::string> patterns;
        std::set<std::size_t> skip;
        for (const auto& s : b.scans) {
            scans_[s.id] = &s;
            if (s.kind == Scan::Kind::Domain) {
                if (!schema_.is_entity(s.name))
                    throw Error(Errc::UnsupportedConstruct, "variable of descriptive type " + s.name +
                                                                " is not bound by any graph pattern");
                std::string n = node_name(b, s, 0, skip);
                nodes_[{s.id, 0}] = n;
                if (!declared_.contains(n))
                    patterns.push_back(node_pattern(n, s.name));
                continue;
            }
            const AttributeDecl* attr = schema_.find_attribute(s.name);
            std::string src = node_name(b, s, 0, skip);
            nodes_[{s.id, 0}] = src;
            if (attr->shape == Shape::NodeProps) {
                if (!declared_.contains(src))
                    patterns.push_back(node_pattern(src, s.layout[0]));
                continue;
            }
            std::size_t last = s.layout.size() - 1;
            std::string dst = node_name(b, s, static_cast<int>(last), skip);
            nodes_[{s.id, static_cast<int>(last)}] = dst;
            std::string rel = fresh("r", rel_counter_);
            rels_[s.id] = rel;
            std::string left = node_pattern(src, s.layout[0]);
            std::string right = node_pattern(dst, s.layout[last]);
            patterns.push_back(left + "-[" + rel + ":" + s.name + "]->" + right);
        }
        return {patterns, conds(b, skip)};
    }

    std::string column(const Expr& e) override {
        auto node = nodes_.find({e.scan, e.col});
        if (node != nodes_.end())
            return node->second;
        const Scan& s = *scans_.at(e.scan);
        std::string prop = s.layout.at(static_cast<std::size_t>(e.col));
        auto rel = rels_.find(e.scan);
        if (rel != rels_.end())
            return rel->second + "." + prop;
        return nodes_.at({e.scan, 0}) + "." + prop;
    }

    std::string literal(const Value& v) override {
        if (v.is_string())
            return quote(v.as_string(), '\\');
        if (v.is_entity())
            return quote(v.as_entity().id, '\\');
        if (v.is_date())
            return "date('" + display(v) + "')";
        if (v.is_bool())
            return v.as_bool() ? "true" : "false";
        return display(v);
    }

    std::string not_exists(const Block& b) override {
        auto [patterns, cs] = block_parts(b);
        if (patterns.empty())
            return cs.empty() ? false_text() : "NOT (" + join(cs, " AND ") + ")";
        std::string inner = "MATCH " + join(patterns, ", ");
        if (!cs.empty())
            inner += " WHERE " + join(cs, " AND ");
        return "NOT EXISTS { " + inner + " }";
    }

    std::string in_domain(const Cond&) override {
        throw Error(Errc::UnsupportedConstruct, "arithmetic definitions of quantified variables have no Cypher form");
    }

    std::string count(const Expr&) override {
        throw Error(Errc::UnsupportedConstruct, "COUNT is computed by the mediator, not in Cypher");
    }

    std::string false_text() override { return "false"; }
};

} // namespace

std::string to_sql(const Term& query, const Schema& schema) {
    require_source(query, schema, Source::Relational, "SQL");
    CompiledQuery q = compile_query(query, schema);
    return SqlWriter(schema).query(q);
}

std::string to_cypher(const Term& query, const Schema& schema) {
    require_source(query, schema, Source::Graph, "Cypher");
    CompiledQuery q = compile_query(query, schema);
    return CypherWriter(schema, all_var_names(query)).query(q);
}

} // namespace lambdaq
