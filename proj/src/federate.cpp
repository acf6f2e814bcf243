#include "lambdaq/error.hpp"
#include "lambdaq/parser.hpp"
#include "lambdaq/translate.hpp"
#include "lambdaq/typecheck.hpp"

#include <algorithm>
#include <map>

namespace lambdaq {

std::string_view to_string(PlanStep::Kind k) {
    switch (k) {
    case PlanStep::Kind::FetchGraph: return "fetch graph";
    case PlanStep::Kind::FetchRelational: return "fetch relational";
    case PlanStep::Kind::Mediate: return "mediate";
    case PlanStep::Kind::Join: return "join";
    case PlanStep::Kind::Enumerate: return "enumerate";
    case PlanStep::Kind::Derive: return "derive";
    case PlanStep::Kind::Filter: return "filter";
    case PlanStep::Kind::Project: return "project";
    case PlanStep::Kind::Evaluate: return "evaluate";
    }
    return "?";
}

namespace {

using VarList = std::vector<std::pair<std::string, TypeExpr>>;

std::set<Source> sources_of(const Term& t, const Schema& schema) {
    std::set<Source> out;
    for (const auto& name : attr_refs(t))
        out.insert(schema.resolve_attribute(name).source);
    return out;
}

bool contains_var(const VarList& vars, const std::string& name) {
    return std::any_of(vars.begin(), vars.end(), [&](const auto& p) { return p.first == name; });
}

const TypeExpr& type_in(const VarList& vars, const std::string& name) {
    for (const auto& [n, t] : vars)
        if (n == name)
            return t;
    throw Error(Errc::UnknownVariable, "no variable '" + name + "'");
}

std::string var_list_text(const std::vector<std::string>& names) {
    std::string out = "(";
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (i)
            out += ", ";
        out += names[i];
    }
    return out + ")";
}

std::string typed_text(const std::string& name, const TypeExpr& t) { return name + "^" + render_type(t); }

bool is_count_of_lambda(const Term& def) {
    return def.kind == TermKind::Count && def.kids[0].kind == TermKind::Lambda &&
           def.kids[0].binders.size() == 1;
}

class SegmentBuilder {
public:
    SegmentBuilder(const Schema& schema, std::set<std::string>& used) : schema_(schema), used_(used) {}

    SourceSegment build(const VarList& vars, const std::vector<Term>& parts) {
        vars_ = vars;
        locals_.clear();
        flat_.clear();
        for (const auto& p : parts)
            flatten(p);

        std::vector<Term> graph, rel, free;
        for (auto& c : flat_) {
            auto src = sources_of(c, schema_);
            if (src.size() == 2)
                throw Error(Errc::NotPartitionable,
                            "'" + render_term(c) + "' combines graph and relational attributes under " +
                                std::string(c.kind == TermKind::Or ? "a disjunction" : "one connective"),
                            c.span);
            if (src.empty())
                free.push_back(std::move(c));
            else if (*src.begin() == Source::Graph)
                graph.push_back(std::move(c));
            else
                rel.push_back(std::move(c));
        }
        auto gvars = vars_of(graph);
        auto rvars = vars_of(rel);
        std::vector<Term> cross;
        for (auto& c : free) {
            auto fv = free_vars(c);
            auto within = [&](const std::set<std::string>& side) {
                return !fv.empty() &&
                       std::all_of(fv.begin(), fv.end(), [&](const std::string& v) { return side.contains(v); });
            };
            if (within(gvars))
                graph.push_back(std::move(c));
            else if (within(rvars))
                rel.push_back(std::move(c));
            else
                cross.push_back(std::move(c));
        }
        std::set<std::string> cross_vars;
        for (const auto& c : cross)
            for (const auto& v : free_vars(c))
                cross_vars.insert(v);

        SourceSegment seg;
        seg.vars = vars;
        auto exports = [&](const std::set<std::string>& mine, const std::set<std::string>& other) {
            VarList out;
            for (const auto& [n, t] : all_vars())
                if (mine.contains(n) && (contains_var(vars_, n) || other.contains(n) || cross_vars.contains(n)))
                    out.emplace_back(n, t);
            return out;
        };
        VarList gexp = exports(gvars, rvars);
        VarList rexp = exports(rvars, gvars);
        // A side exporting nothing is a guard; expose one of its variables
        // so it still has a query form. Without any it stays a closed formula.
        auto open_guard = [&](VarList& exp, const std::set<std::string>& mine) {
            if (!exp.empty())
                return;
            for (const auto& [n, t] : all_vars())
                if (mine.contains(n)) {
                    exp.emplace_back(n, t);
                    return;
                }
        };
        open_guard(gexp, gvars);
        open_guard(rexp, rvars);
        if (!graph.empty())
            seg.graph_query = side_query(gexp, gvars, graph);
        if (!rel.empty())
            seg.rel_query = side_query(rexp, rvars, rel);

        for (const auto& [n, t] : gexp)
            if (contains_var(rexp, n))
                seg.join_keys.emplace_back(n, n);
        for (auto& c : cross) {
            if (c.kind == TermKind::Compare && c.cmp == CmpOp::Eq && c.kids[0].kind == TermKind::Var &&
                c.kids[1].kind == TermKind::Var) {
                const std::string& a = c.kids[0].name;
                const std::string& b = c.kids[1].name;
                if (contains_var(gexp, a) && contains_var(rexp, b) && !contains_var(rexp, a)) {
                    seg.join_keys.emplace_back(a, b);
                    continue;
                }
                if (contains_var(gexp, b) && contains_var(rexp, a) && !contains_var(rexp, b)) {
                    seg.join_keys.emplace_back(b, a);
                    continue;
                }
            }
            seg.cross.push_back(std::move(c));
        }
        for (const auto& [n, t] : all_vars())
            if (!gvars.contains(n) && !rvars.contains(n))
                seg.uncovered.push_back(Binder{n, t});
        return seg;
    }

private:
    const Schema& schema_;
    std::set<std::string>& used_;
    VarList vars_;
    VarList locals_;
    std::vector<Term> flat_;

    VarList all_vars() const {
        VarList out = vars_;
        out.insert(out.end(), locals_.begin(), locals_.end());
        return out;
    }

    static std::set<std::string> vars_of(const std::vector<Term>& parts) {
        std::set<std::string> out;
        for (const auto& p : parts)
            for (const auto& v : free_vars(p))
                out.insert(v);
        return out;
    }

    void flatten(const Term& t) {
        if (t.kind == TermKind::And) {
            flatten(t.kids[0]);
            flatten(t.kids[1]);
            return;
        }
        if (t.kind == TermKind::Exists) {
            Term body = t.body();
            for (const auto& b : t.binders) {
                std::string name = b.name;
                if (contains_var(vars_, name) || contains_var(locals_, name)) {
                    name = fresh_name(b.name, used_);
                    body = rename_free(body, b.name, name);
                }
                used_.insert(name);
                locals_.emplace_back(name, *b.type);
            }
            flatten(body);
            return;
        }
        flat_.push_back(t);
    }

    Term side_query(const VarList& exports, const std::set<std::string>& side_vars, const std::vector<Term>& parts) {
        std::vector<Binder> params;
        for (const auto& [n, t] : exports)
            params.push_back(Binder{n, t});
        std::vector<Binder> hidden;
        for (const auto& [n, t] : locals_)
            if (side_vars.contains(n) && !contains_var(exports, n))
                hidden.push_back(Binder{n, t});
        Term body = make_conjunction(parts);
        if (!hidden.empty())
            body = Term::exists(std::move(hidden), std::move(body));
        if (params.empty())
            return body;
        return Term::lambda(std::move(params), std::move(body));
    }
};

struct Built {
    std::optional<SourceSegment> main;
    VarList enumerated;
    std::vector<Derivation> derivations;
    std::vector<Term> post_filters;
};

Built build(const Term& query, const Schema& schema) {
    check_query(query, schema);
    BindingPlan bp = analyze_range_restriction(query, schema);
    std::set<std::string> used = all_var_names(query);
    SegmentBuilder builder(schema, used);
    Built out;

    std::set<std::string> derived;
    std::vector<std::pair<std::string, Term>> defs;
    for (const auto& step : bp.steps) {
        if (step.kind == Binding::Kind::Enumerate) {
            out.enumerated.emplace_back(step.var, step.type);
            continue;
        }
        derived.insert(step.var);
        defs.emplace_back(step.var, *step.definition);
        Derivation d;
        d.var = step.var;
        d.type = step.type;
        const Term& def = *step.definition;
        if (is_count_of_lambda(def)) {
            const Term& lam = def.kids[0];
            VarList seg_vars;
            for (const auto& [n, t] : out.enumerated)
                if (free_vars(def).contains(n)) {
                    seg_vars.emplace_back(n, t);
                    d.group_vars.push_back(n);
                }
            for (const auto& v : free_vars(def))
                if (!contains_var(out.enumerated, v))
                    throw Error(Errc::UnsupportedConstruct, "COUNT depends on derived variable '" + v + "'", def.span);
            std::string elem = lam.binders[0].name;
            Term body = lam.body();
            if (contains_var(seg_vars, elem)) {
                std::string fresh = fresh_name(elem, used);
                body = rename_free(body, elem, fresh);
                elem = fresh;
            }
            used.insert(elem);
            seg_vars.emplace_back(elem, *lam.binders[0].type);
            d.element_var = elem;
            d.count_segment = builder.build(seg_vars, {body});
        } else {
            if (!attr_refs(def).empty())
                throw Error(Errc::UnsupportedConstruct,
                            "derived variable '" + step.var + "' reads attributes outside COUNT", def.span);
            d.expr = def;
        }
        out.derivations.push_back(std::move(d));
    }

    std::vector<Term> main_parts;
    for (const auto& c : conjuncts(query.body())) {
        bool defining = false;
        for (const auto& [var, def] : defs)
            if (c.kind == TermKind::Compare && c.cmp == CmpOp::Eq &&
                ((c.kids[0].kind == TermKind::Var && c.kids[0].name == var && alpha_equal(c.kids[1], def)) ||
                 (c.kids[1].kind == TermKind::Var && c.kids[1].name == var && alpha_equal(c.kids[0], def))))
                defining = true;
        if (defining)
            continue;
        auto fv = free_vars(c);
        if (std::any_of(fv.begin(), fv.end(), [&](const std::string& v) { return derived.contains(v); })) {
            if (!attr_refs(c).empty())
                throw Error(Errc::UnsupportedConstruct, "condition on derived variable reads attributes", c.span);
            out.post_filters.push_back(c);
            continue;
        }
        main_parts.push_back(c);
    }
    if (!main_parts.empty())
        out.main = builder.build(out.enumerated, main_parts);
    return out;
}

std::string fetch_text(const Term& side, const Schema& schema, bool graph) {
    if (side.kind != TermKind::Lambda)
        return "evaluate " + render_term(side) + " [closed guard]";
    try {
        return graph ? to_cypher(side, schema) : to_sql(side, schema);
    } catch (const Error& e) {
        if (e.code() != Errc::UnsupportedConstruct && e.code() != Errc::UnsafeQuery)
            throw;
        return "evaluate " + render_term(side) + " [no " + std::string(graph ? "Cypher" : "SQL") + " form]";
    }
}

void list_segment(const SourceSegment& seg, const Schema& schema, std::vector<PlanStep>& steps) {
    VarList all_types = seg.vars;
    auto note_types = [&](const Term& side) {
        for (const auto& b : side.binders)
            if (!contains_var(all_types, b.name))
                all_types.emplace_back(b.name, *b.type);
    };
    if (seg.graph_query) {
        note_types(*seg.graph_query);
        std::vector<std::string> names;
        for (const auto& b : seg.graph_query->binders)
            names.push_back(b.name);
        steps.push_back({PlanStep::Kind::FetchGraph,
                         var_list_text(names) + ": " + fetch_text(*seg.graph_query, schema, true)});
    }
    if (seg.rel_query) {
        note_types(*seg.rel_query);
        std::vector<std::string> names;
        for (const auto& b : seg.rel_query->binders)
            names.push_back(b.name);
        steps.push_back({PlanStep::Kind::FetchRelational,
                         var_list_text(names) + ": " + fetch_text(*seg.rel_query, schema, false)});
    }
    if (seg.graph_query && seg.rel_query) {
        if (!seg.join_keys.empty()) {
            std::string med, on;
            for (const auto& [g, r] : seg.join_keys) {
                if (!med.empty()) {
                    med += ", ";
                    on += " and ";
                }
                med += typed_text(g, type_in(all_types, g)) + " ~ " + typed_text(r, type_in(all_types, r));
                on += g + " = " + r;
            }
            steps.push_back({PlanStep::Kind::Mediate, med});
            steps.push_back({PlanStep::Kind::Join, "on " + on});
        } else {
            steps.push_back({PlanStep::Kind::Join, "cross product"});
        }
    }
    if (!seg.uncovered.empty()) {
        std::string text;
        for (const auto& b : seg.uncovered) {
            if (!text.empty())
                text += ", ";
            text += typed_text(b.name, *b.type);
        }
        steps.push_back({PlanStep::Kind::Enumerate, text + " from active domains"});
    }
    if (!seg.cross.empty())
        steps.push_back({PlanStep::Kind::Filter, render_term(make_conjunction(seg.cross))});
}

std::optional<Term> query_def(const Term& query, const Schema& schema, const std::string& var) {
    for (const auto& step : analyze_range_restriction(query, schema).steps)
        if (step.var == var)
            return step.definition;
    return std::nullopt;
}

} // namespace

static const Term& side_body(const Term& side) { return side.kind == TermKind::Lambda ? side.body() : side; }

SourcePartition partition_by_source(const Term& query, const Schema& schema) {
    Built b = build(query, schema);
    SourcePartition p;
    std::vector<const SourceSegment*> segs;
    if (b.main)
        segs.push_back(&*b.main);
    for (const auto& d : b.derivations) {
        if (d.count_segment)
            segs.push_back(&*d.count_segment);
        p.post_aggregations.emplace_back(d.var, Term{});
    }
    std::vector<Term> gparts, rparts;
    for (const auto* s : segs) {
        if (s->graph_query) {
            gparts.push_back(side_body(*s->graph_query));
            for (const auto& bd : s->graph_query->binders)
                if (!contains_var(p.shared_vars, bd.name))
                    p.shared_vars.emplace_back(bd.name, *bd.type);
        }
        if (s->rel_query) {
            rparts.push_back(side_body(*s->rel_query));
            for (const auto& bd : s->rel_query->binders)
                if (!contains_var(p.shared_vars, bd.name))
                    p.shared_vars.emplace_back(bd.name, *bd.type);
        }
        p.join_keys.insert(p.join_keys.end(), s->join_keys.begin(), s->join_keys.end());
        p.segments.push_back(*s);
    }
    if (!gparts.empty())
        p.graph_subterm = make_conjunction(std::move(gparts));
    if (!rparts.empty())
        p.rel_subterm = make_conjunction(std::move(rparts));
    // Defining terms, in derivation order.
    BindingPlan bp = analyze_range_restriction(query, schema);
    p.post_aggregations.clear();
    for (const auto& step : bp.steps)
        if (step.kind == Binding::Kind::Derive)
            p.post_aggregations.emplace_back(step.var, *step.definition);
    return p;
}

FederatedPlan plan_federated(const Term& query, const Schema& schema) {
    FederatedPlan plan;
    plan.query = query;
    plan.signature = check_query(query, schema);
    std::vector<std::string> out_names;
    for (const auto& [n, t] : plan.signature.columns)
        out_names.push_back(n);

    Built b;
    try {
        b = build(query, schema);
    } catch (const Error& e) {
        if (e.code() != Errc::UnsupportedConstruct)
            throw;
        plan.fallback = e.message();
        plan.steps.push_back({PlanStep::Kind::Evaluate, "whole query by reference evaluation: " + e.message()});
        plan.steps.push_back({PlanStep::Kind::Project, var_list_text(out_names)});
        return plan;
    }
    plan.main = b.main;
    plan.enumerated = b.enumerated;
    plan.derivations = b.derivations;
    plan.post_filters = b.post_filters;

    std::string enum_text;
    for (const auto& [n, t] : plan.enumerated) {
        if (!enum_text.empty())
            enum_text += ", ";
        enum_text += typed_text(n, t);
    }
    bool has_count = std::any_of(plan.derivations.begin(), plan.derivations.end(),
                                 [](const Derivation& d) { return d.count_segment.has_value(); });
    if (plan.main)
        list_segment(*plan.main, schema, plan.steps);
    else if (!plan.enumerated.empty() && !has_count)
        plan.steps.push_back({PlanStep::Kind::Enumerate, enum_text + " from active domains"});

    for (const auto& d : plan.derivations) {
        if (d.count_segment) {
            list_segment(*d.count_segment, schema, plan.steps);
            const Term& def = *query_def(plan.query, schema, d.var);
            std::string text = d.var + " = COUNT_" + def.name + "(" + d.element_var + ") per " +
                               var_list_text(d.group_vars);
            if (plan.main)
                text += "; zero counts for main rows without elements";
            else if (!plan.enumerated.empty())
                text += "; zero counts over active domains of " + enum_text;
            plan.steps.push_back({PlanStep::Kind::Derive, text});
        } else {
            plan.steps.push_back({PlanStep::Kind::Derive, d.var + " = " + render_term(*d.expr)});
        }
    }
    if (!plan.post_filters.empty())
        plan.steps.push_back({PlanStep::Kind::Filter, render_term(make_conjunction(plan.post_filters))});
    plan.steps.push_back({PlanStep::Kind::Project, var_list_text(out_names)});
    return plan;
}

std::string render_plan(const FederatedPlan& plan) {
    std::string out;
    for (std::size_t i = 0; i < plan.steps.size(); ++i)
        out += std::to_string(i + 1) + ". " + std::string(to_string(plan.steps[i].kind)) + " " +
               plan.steps[i].text + "\n";
    return out;
}

// ---------------------------------------------------------------------------
// Execution

namespace {

using Assignment = std::vector<std::pair<std::string, Value>>;

const Value& value_of(const Assignment& a, const std::string& name) {
    for (const auto& [n, v] : a)
        if (n == name)
            return v;
    throw Error(Errc::UnknownVariable, "no value for '" + name + "'");
}

class PlanRunner {
public:
    PlanRunner(const FederatedPlan& plan, const Stores& stores, const Schema& schema, const EvalOptions& options)
        : plan_(plan), stores_(stores), schema_(schema), options_(options),
          tev_(plan.query, stores, schema, options) {}

    std::vector<Assignment> fetch(const Term& side) {
        if (side.kind != TermKind::Lambda) {
            Value v = tev_.eval(side, {});
            if (v.is_bool() && v.as_bool())
                return {Assignment{}};
            return {};
        }
        Relation r;
        QuerySignature sig = check_query(side, schema_);
        try {
            r = execute_compiled(compile_query(side, schema_), sig, plan_.query, stores_, schema_, options_);
        } catch (const Error& e) {
            if (e.code() != Errc::UnsupportedConstruct && e.code() != Errc::UnsafeQuery)
                throw;
            r = eval_query(side, stores_, schema_, options_, plan_.query);
        }
        std::vector<Assignment> out;
        for (const auto& row : r.rows) {
            Assignment a;
            for (std::size_t i = 0; i < row.size(); ++i)
                a.emplace_back(sig.columns[i].first, row[i]);
            out.push_back(std::move(a));
        }
        return out;
    }

    /// Rows of a segment projected on its variables.
    std::set<Row> run_segment(const SourceSegment& seg) {
        std::vector<Assignment> current{Assignment{}};
        if (seg.graph_query)
            current = fetch(*seg.graph_query);
        if (seg.rel_query) {
            auto rel = fetch(*seg.rel_query);
            std::vector<Assignment> joined;
            if (!seg.graph_query) {
                joined = std::move(rel);
            } else {
                std::map<Row, std::vector<const Assignment*>> index;
                for (const auto& r : rel) {
                    Row key;
                    for (const auto& [g, rv] : seg.join_keys)
                        key.push_back(value_of(r, rv));
                    index[key].push_back(&r);
                }
                for (const auto& g : current) {
                    Row key;
                    for (const auto& [gv, rv] : seg.join_keys)
                        key.push_back(value_of(g, gv));
                    auto it = index.find(key);
                    if (it == index.end())
                        continue;
                    for (const auto* r : it->second) {
                        Assignment a = g;
                        for (const auto& kv : *r)
                            if (std::none_of(a.begin(), a.end(), [&](const auto& p) { return p.first == kv.first; }))
                                a.push_back(kv);
                        joined.push_back(std::move(a));
                        guard(joined.size());
                    }
                }
            }
            current = std::move(joined);
        }
        for (const auto& b : seg.uncovered)
            current = extend(current, b);
        std::set<Row> out;
        for (const auto& a : current) {
            bool ok = true;
            for (const auto& c : seg.cross) {
                Value v = tev_.eval(c, a);
                if (!v.is_bool() || !v.as_bool()) {
                    ok = false;
                    break;
                }
            }
            if (!ok)
                continue;
            Row row;
            for (const auto& [n, t] : seg.vars)
                row.push_back(value_of(a, n));
            out.insert(std::move(row));
        }
        return out;
    }

    std::vector<Assignment> extend(const std::vector<Assignment>& rows, const Binder& b) {
        const auto& dom = tev_.domains().of_type(*b.type);
        std::vector<Assignment> out;
        for (const auto& a : rows)
            for (const auto& v : dom) {
                Assignment x = a;
                x.emplace_back(b.name, v);
                out.push_back(std::move(x));
                guard(out.size());
            }
        return out;
    }

    Relation run() {
        std::vector<Assignment> rows;
        if (plan_.main) {
            for (const auto& row : run_segment(*plan_.main)) {
                Assignment a;
                for (std::size_t i = 0; i < row.size(); ++i)
                    a.emplace_back(plan_.main->vars[i].first, row[i]);
                rows.push_back(std::move(a));
            }
        } else {
            rows = {Assignment{}};
            for (const auto& [n, t] : plan_.enumerated)
                rows = extend(rows, Binder{n, t});
        }
        for (const auto& d : plan_.derivations) {
            if (d.count_segment) {
                std::map<Row, std::int64_t> counts;
                for (const auto& row : run_segment(*d.count_segment)) {
                    Row key(row.begin(), row.end() - 1);
                    ++counts[key];
                }
                for (auto& a : rows) {
                    Row key;
                    for (const auto& g : d.group_vars)
                        key.push_back(value_of(a, g));
                    auto it = counts.find(key);
                    a.emplace_back(d.var, Number(it == counts.end() ? 0 : it->second));
                }
                continue;
            }
            std::vector<Assignment> kept;
            for (auto& a : rows) {
                Value v = tev_.eval(*d.expr, a);
                if (v.contains_undef())
                    continue;
                a.emplace_back(d.var, std::move(v));
                kept.push_back(std::move(a));
            }
            rows = std::move(kept);
        }
        Relation out;
        out.signature = plan_.signature;
        for (const auto& a : rows) {
            bool ok = true;
            for (const auto& f : plan_.post_filters) {
                Value v = tev_.eval(f, a);
                if (!v.is_bool() || !v.as_bool()) {
                    ok = false;
                    break;
                }
            }
            if (!ok)
                continue;
            Row row;
            for (const auto& [n, t] : plan_.signature.columns)
                row.push_back(value_of(a, n));
            out.rows.insert(std::move(row));
        }
        return out;
    }

private:
    const FederatedPlan& plan_;
    const Stores& stores_;
    const Schema& schema_;
    EvalOptions options_;
    TermEvaluator tev_;

    void guard(std::size_t n) const {
        if (n > options_.max_domain)
            throw Error(Errc::DomainTooLarge,
                        "plan execution exceeds " + std::to_string(options_.max_domain) + " intermediate rows");
    }
};

} // namespace

Relation execute_plan(const FederatedPlan& plan, const Stores& stores, const Schema& schema,
                      const EvalOptions& options) {
    if (plan.fallback)
        return eval_query(plan.query, stores, schema, options);
    return PlanRunner(plan, stores, schema, options).run();
}

} // namespace lambdaq
