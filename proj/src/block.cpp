#include "lambdaq/error.hpp"
#include "lambdaq/parser.hpp"
#include "lambdaq/translate.hpp"
#include "lambdaq/typecheck.hpp"

#include <algorithm>
#include <functional>
#include <map>

namespace lambdaq {

Expr Expr::column(int scan, int col) {
    Expr e;
    e.kind = Kind::Column;
    e.scan = scan;
    e.col = col;
    return e;
}

Expr Expr::constant(Value v) {
    Expr e;
    e.kind = Kind::Const;
    e.value = std::move(v);
    return e;
}

namespace {

[[noreturn]] void unsupported(const std::string& what, const Term& at) {
    throw Error(Errc::UnsupportedConstruct, what + " is outside the translatable fragment", at.span);
}

bool has_attr(const Term& t) { return !attr_refs(t).empty(); }

/// A Bool-valued formula body that the negation-to-NOT-EXISTS scheme handles.
struct SubQuery {
    std::vector<Binder> binders;
    std::vector<Term> parts;
};

class Compiler {
public:
    Compiler(const Schema& schema, std::set<std::string> used) : schema_(schema), used_(std::move(used)) {}

    int scan_count() const { return next_scan_; }

    /// Scope entries visible from enclosing blocks, innermost last.
    using Scope = std::vector<std::pair<std::string, Expr>>;

    /// Compiles `parts` (a conjunction) into `block`. `locals` must all be
    /// bound inside the block; `unchecked` locals skip the active-domain
    /// check when defined by an arithmetic expression.
    void compile(Block& block, const std::vector<Term>& parts, std::vector<Binder> locals, const Scope& outer,
                 const std::set<std::string>& unchecked = {}) {
        State st{block, outer, {}, {}, {}, {}, {}, {}, {}, unchecked};
        for (auto& b : locals)
            add_local(st, b);
        for (const auto& p : parts)
            flatten(st, p);

        for (const auto& p : st.positives) {
            if (p.kind == TermKind::App)
                atom(st, p);
            else
                attr_scans(st, p);
        }
        std::vector<bool> used(st.compares.size(), false);
        while (true) {
            define_fixpoint(st, used);
            auto it = std::find_if(st.locals.begin(), st.locals.end(),
                                   [&](const Binder& b) { return !bound_here(st, b.name); });
            if (it == st.locals.end())
                break;
            domain_scan(st, *it);
        }
        for (auto& [col, term] : st.pending)
            push_compare(st, CmpOp::Eq, col, compile_expr(st, term));
        for (std::size_t i = 0; i < st.compares.size(); ++i)
            if (!used[i]) {
                const Term& c = st.compares[i];
                push_compare(st, c.cmp, compile_expr(st, c.kids[0]), compile_expr(st, c.kids[1]));
            }
        for (const auto& c : st.neg_compares) {
            Cond cond;
            cond.kind = Cond::Kind::NotCompare;
            cond.op = c.cmp;
            cond.lhs = compile_expr(st, c.kids[0]);
            cond.rhs = compile_expr(st, c.kids[1]);
            block.conds.push_back(std::move(cond));
        }
        if (st.always_false) {
            Cond cond;
            cond.kind = Cond::Kind::False;
            block.conds.push_back(std::move(cond));
        }
        Scope inner = outer;
        inner.insert(inner.end(), block.vars.begin(), block.vars.end());
        for (auto& nq : st.negatives) {
            auto sub = std::make_shared<Block>();
            compile(*sub, nq.parts, nq.binders, inner);
            Cond cond;
            cond.kind = Cond::Kind::NotExists;
            cond.sub = std::move(sub);
            block.conds.push_back(std::move(cond));
        }
    }

    /// Expression for a variable visible in `scope`.
    static std::optional<Expr> lookup(const Scope& scope, const std::string& name) {
        for (auto it = scope.rbegin(); it != scope.rend(); ++it)
            if (it->first == name)
                return it->second;
        return std::nullopt;
    }

private:
    const Schema& schema_;
    std::set<std::string> used_;
    int next_scan_ = 0;

    struct State {
        Block& block;
        const Scope& outer;
        std::vector<Binder> locals;
        std::vector<Term> positives;
        std::vector<Term> compares;
        std::vector<Term> neg_compares;
        std::vector<SubQuery> negatives;
        std::vector<std::pair<Expr, Term>> pending;
        std::map<std::string, int> value_scans; ///< attr application key -> scan id
        const std::set<std::string>& unchecked;
        bool always_false = false;
    };

    bool visible(const State& st, const std::string& name) const {
        if (lookup(st.outer, name))
            return true;
        return std::any_of(st.locals.begin(), st.locals.end(), [&](const Binder& b) { return b.name == name; });
    }

    bool bound_here(const State& st, const std::string& name) const {
        return std::any_of(st.block.vars.begin(), st.block.vars.end(),
                           [&](const auto& kv) { return kv.first == name; });
    }

    bool is_local(const State& st, const std::string& name) const {
        return std::any_of(st.locals.begin(), st.locals.end(), [&](const Binder& b) { return b.name == name; });
    }

    bool is_bound(const State& st, const std::string& name) const {
        if (is_local(st, name))
            return bound_here(st, name);
        return lookup(st.outer, name).has_value();
    }

    void add_local(State& st, const Binder& b) {
        if (!b.type || !b.type->is_base())
            throw Error(Errc::UnsupportedConstruct, "variable '" + b.name + "' of non-base type is outside the "
                                                    "translatable fragment");
        st.locals.push_back(b);
        st.block.var_types.emplace_back(b.name, *b.type);
        used_.insert(b.name);
    }

    void bind(State& st, const std::string& name, Expr e) { st.block.vars.emplace_back(name, std::move(e)); }

    Expr var_expr(const State& st, const Term& v) const {
        for (auto it = st.block.vars.rbegin(); it != st.block.vars.rend(); ++it)
            if (it->first == v.name)
                return it->second;
        if (!is_local(st, v.name))
            if (auto e = lookup(st.outer, v.name))
                return *e;
        throw Error(Errc::UnknownVariable, "variable '" + v.name + "' is not bound here", v.span);
    }

    /// Introduces the binders of a positive existential as block locals,
    /// renaming any that would shadow a visible variable.
    Term open_binders(State& st, const std::vector<Binder>& binders, Term body) {
        for (const auto& b : binders) {
            Binder nb = b;
            if (visible(st, b.name)) {
                nb.name = fresh_name(b.name, used_);
                body = rename_free(body, b.name, nb.name);
            }
            add_local(st, nb);
        }
        return body;
    }

    void flatten(State& st, const Term& t) {
        switch (t.kind) {
        case TermKind::And:
            flatten(st, t.kids[0]);
            flatten(st, t.kids[1]);
            return;
        case TermKind::Exists: flatten(st, open_binders(st, t.binders, t.body())); return;
        case TermKind::Const:
            if (t.value.is_bool()) {
                if (!t.value.as_bool())
                    st.always_false = true;
                return;
            }
            break;
        case TermKind::App: st.positives.push_back(t); return;
        case TermKind::Compare:
            st.positives.push_back(t);
            st.compares.push_back(t);
            return;
        case TermKind::Not: flatten_negated(st, t.kids[0]); return;
        case TermKind::Implies:
            st.negatives.push_back({{}, {t.kids[0], Term::negate(t.kids[1])}});
            return;
        case TermKind::Forall:
            st.negatives.push_back({t.binders, {Term::negate(t.body())}});
            return;
        default: break;
        }
        unsupported("'" + render_term(t) + "' as a conjunct", t);
    }

    void flatten_negated(State& st, const Term& t) {
        switch (t.kind) {
        case TermKind::Not: flatten(st, t.kids[0]); return;
        case TermKind::Or:
            flatten_negated(st, t.kids[0]);
            flatten_negated(st, t.kids[1]);
            return;
        case TermKind::Implies:
            flatten(st, t.kids[0]);
            flatten_negated(st, t.kids[1]);
            return;
        case TermKind::Forall: flatten(st, Term::exists(t.binders, Term::negate(t.body()))); return;
        case TermKind::Const:
            if (t.value.is_bool()) {
                if (t.value.as_bool())
                    st.always_false = true;
                return;
            }
            break;
        case TermKind::Compare:
            if (!has_attr(t)) {
                st.neg_compares.push_back(t);
                return;
            }
            break;
        case TermKind::Exists: st.negatives.push_back({t.binders, {t.body()}}); return;
        default: break;
        }
        st.negatives.push_back({{}, {t}});
    }

    int new_scan(State& st, Scan::Kind kind, std::string name, std::vector<std::string> layout) {
        Scan s;
        s.kind = kind;
        s.id = ++next_scan_;
        s.name = std::move(name);
        s.layout = std::move(layout);
        st.block.scans.push_back(std::move(s));
        return next_scan_;
    }

    void link(State& st, int scan, int col, const Term& arg) {
        if (arg.kind == TermKind::Var && is_local(st, arg.name) && !bound_here(st, arg.name)) {
            bind(st, arg.name, Expr::column(scan, col));
            return;
        }
        st.pending.emplace_back(Expr::column(scan, col), arg);
    }

    void atom(State& st, const Term& t) {
        const Term& fn = t.kids[0];
        if (fn.kind == TermKind::AttrRef) {
            const AttributeDecl& attr = schema_.resolve_attribute(fn.name);
            if (attr.shape != Shape::Relation)
                unsupported("graph attribute '" + attr.name + "' applied without a source node", t);
            int id = new_scan(st, Scan::Kind::Attribute, attr.name, schema_.row_layout(attr));
            for (std::size_t i = 1; i < t.kids.size(); ++i)
                link(st, id, static_cast<int>(i - 1), t.kids[i]);
            return;
        }
        if (fn.kind == TermKind::App && fn.kids[0].kind == TermKind::AttrRef && fn.kids.size() == 2) {
            const AttributeDecl& attr = schema_.resolve_attribute(fn.kids[0].name);
            auto layout = schema_.row_layout(attr);
            if (attr.shape == Shape::Relation || layout.size() != t.kids.size())
                unsupported("application of '" + attr.name + "'", t);
            int id = new_scan(st, Scan::Kind::Attribute, attr.name, std::move(layout));
            link(st, id, 0, fn.kids[1]);
            for (std::size_t i = 1; i < t.kids.size(); ++i)
                link(st, id, static_cast<int>(i), t.kids[i]);
            return;
        }
        unsupported("application '" + render_term(t) + "'", t);
    }

    static std::string value_key(const Term& app) { return app.kids[0].name + "|" + render_term(app.kids[1]); }

    /// Scans for single-valued attribute applications inside a comparison.
    void attr_scans(State& st, const Term& t) {
        if (t.kind == TermKind::App && t.kids[0].kind == TermKind::AttrRef && t.kids.size() == 2) {
            const AttributeDecl& attr = schema_.resolve_attribute(t.kids[0].name);
            if (is_multivalued(attr.shape))
                unsupported("multivalued '" + attr.name + "' inside a comparison", t);
            attr_scans(st, t.kids[1]);
            std::string key = value_key(t);
            if (st.value_scans.contains(key))
                return;
            int id = new_scan(st, Scan::Kind::Attribute, attr.name, schema_.row_layout(attr));
            st.value_scans[key] = id;
            link(st, id, 0, t.kids[1]);
            return;
        }
        for (const auto& k : t.kids)
            attr_scans(st, k);
    }

    bool computable(const State& st, const Term& t) const {
        for (const auto& v : free_vars(t))
            if (!is_bound(st, v))
                return false;
        return true;
    }

    static bool needs_domain_check(const Term& t) {
        if (t.kind == TermKind::Arith || t.kind == TermKind::Count)
            return true;
        return std::any_of(t.kids.begin(), t.kids.end(), needs_domain_check);
    }

    void define_fixpoint(State& st, std::vector<bool>& used) {
        bool changed = true;
        while (changed) {
            changed = false;
            for (std::size_t i = 0; i < st.compares.size(); ++i) {
                const Term& c = st.compares[i];
                if (used[i] || c.cmp != CmpOp::Eq)
                    continue;
                for (int side = 0; side < 2; ++side) {
                    const Term& v = c.kids[side];
                    const Term& e = c.kids[1 - side];
                    if (v.kind != TermKind::Var || !is_local(st, v.name) || bound_here(st, v.name) ||
                        !computable(st, e))
                        continue;
                    Expr ex = compile_expr(st, e);
                    bind(st, v.name, ex);
                    if (needs_domain_check(e) && !st.unchecked.contains(v.name)) {
                        Cond cond;
                        cond.kind = Cond::Kind::InDomain;
                        cond.lhs = ex;
                        cond.base = type_of_local(st, v.name).name();
                        st.block.conds.push_back(std::move(cond));
                    }
                    used[i] = true;
                    changed = true;
                    break;
                }
            }
        }
    }

    const TypeExpr& type_of_local(const State& st, const std::string& name) const {
        for (const auto& b : st.locals)
            if (b.name == name)
                return *b.type;
        throw Error(Errc::UnknownVariable, "no local '" + name + "'");
    }

    void domain_scan(State& st, const Binder& b) {
        int id = new_scan(st, Scan::Kind::Domain, b.type->name(), {b.type->name()});
        bind(st, b.name, Expr::column(id, 0));
    }

    void push_compare(State& st, CmpOp op, Expr lhs, Expr rhs) {
        Cond cond;
        cond.kind = Cond::Kind::Compare;
        cond.op = op;
        cond.lhs = std::move(lhs);
        cond.rhs = std::move(rhs);
        st.block.conds.push_back(std::move(cond));
    }

    Expr compile_expr(const State& st, const Term& t) const {
        switch (t.kind) {
        case TermKind::Var: return var_expr(st, t);
        case TermKind::Const: return Expr::constant(t.value);
        case TermKind::Arith: {
            Expr e;
            e.kind = Expr::Kind::Arith;
            e.op = t.arith;
            e.kids = {compile_expr(st, t.kids[0]), compile_expr(st, t.kids[1])};
            return e;
        }
        case TermKind::App:
            if (t.kids[0].kind == TermKind::AttrRef && t.kids.size() == 2) {
                auto it = st.value_scans.find(value_key(t));
                const AttributeDecl& attr = schema_.resolve_attribute(t.kids[0].name);
                if (it != st.value_scans.end() && schema_.row_layout(attr).size() == 2)
                    return Expr::column(it->second, 1);
            }
            break;
        case TermKind::Component: {
            const Term& app = t.kids[0];
            if (app.kind == TermKind::App && app.kids[0].kind == TermKind::AttrRef && app.kids.size() == 2) {
                auto it = st.value_scans.find(value_key(app));
                if (it != st.value_scans.end())
                    return Expr::column(it->second, t.index);
            }
            break;
        }
        default: break;
        }
        unsupported("expression '" + render_term(t) + "'", t);
    }
};

bool is_count_of_lambda(const Term& def) {
    return def.kind == TermKind::Count && def.kids[0].kind == TermKind::Lambda &&
           def.kids[0].binders.size() == 1;
}

} // namespace

CompiledQuery compile_query(const Term& query, const Schema& schema) {
    check_query(query, schema);
    BindingPlan plan = analyze_range_restriction(query, schema);

    std::set<std::string> counted;
    std::set<std::string> derived;
    std::vector<Binder> locals;
    std::vector<std::pair<std::string, Term>> count_defs;
    for (const auto& step : plan.steps) {
        if (step.kind == Binding::Kind::Derive) {
            derived.insert(step.var);
            if (is_count_of_lambda(*step.definition)) {
                counted.insert(step.var);
                count_defs.emplace_back(step.var, *step.definition);
                continue;
            }
            if (has_attr(*step.definition))
                throw Error(Errc::UnsupportedConstruct,
                            "derived variable '" + step.var + "' reads attributes outside COUNT", query.span);
        }
        locals.push_back(Binder{step.var, step.type});
    }

    std::vector<Term> parts;
    for (const auto& c : conjuncts(query.body())) {
        bool defining = false;
        for (const auto& [var, def] : count_defs)
            if (c.kind == TermKind::Compare && c.cmp == CmpOp::Eq &&
                ((c.kids[0].kind == TermKind::Var && c.kids[0].name == var && alpha_equal(c.kids[1], def)) ||
                 (c.kids[1].kind == TermKind::Var && c.kids[1].name == var && alpha_equal(c.kids[0], def))))
                defining = true;
        if (defining)
            continue;
        auto fv = free_vars(c);
        for (const auto& v : counted)
            if (fv.contains(v))
                throw Error(Errc::UnsupportedConstruct, "COUNT result '" + v + "' used in a condition", c.span);
        parts.push_back(c);
    }

    CompiledQuery out;
    Compiler compiler(schema, all_var_names(query));
    compiler.compile(out.block, parts, locals, {}, derived);

    for (const auto& [var, def] : count_defs) {
        const Term& lam = def.kids[0];
        auto sub = std::make_shared<Block>();
        compiler.compile(*sub, {lam.body()}, lam.binders, out.block.vars);
        Expr e;
        e.kind = Expr::Kind::Count;
        e.kids = {*Compiler::lookup(sub->vars, lam.binders[0].name)};
        e.sub = std::move(sub);
        out.block.vars.emplace_back(var, std::move(e));
    }
    for (const auto& b : query.binders)
        out.outputs.emplace_back(b.name, *Compiler::lookup(out.block.vars, b.name));
    out.scan_count = compiler.scan_count();
    return out;
}

// ---------------------------------------------------------------------------
// Execution

namespace {

class Runner {
public:
    Runner(const Term& root, const Stores& stores, const Schema& schema, const EvalOptions& options, int scans)
        : stores_(stores), schema_(schema), options_(options), domains_(stores, schema, constants(root)),
          current_(static_cast<std::size_t>(scans) + 1, nullptr) {}

    Value eval(const Expr& e) {
        switch (e.kind) {
        case Expr::Kind::Column: return (*current_[e.scan])[e.col];
        case Expr::Kind::Const: return e.value;
        case Expr::Kind::Arith: {
            Value a = eval(e.kids[0]);
            Value b = eval(e.kids[1]);
            if (!a.is_number() || !b.is_number())
                return Undef{};
            switch (e.op) {
            case ArithOp::Add: return a.as_number() + b.as_number();
            case ArithOp::Sub: return a.as_number() - b.as_number();
            case ArithOp::Mul: return a.as_number() * b.as_number();
            }
            return Undef{};
        }
        case Expr::Kind::Count: {
            std::set<Value> seen;
            run(*e.sub, [&] {
                seen.insert(eval(e.kids[0]));
                return true;
            });
            return Number(static_cast<std::int64_t>(seen.size()));
        }
        }
        return Undef{};
    }

    /// Calls fn for each match of the block; stops when fn returns false.
    /// Returns false if stopped early.
    bool run(const Block& b, const std::function<bool()>& fn) {
        const Layout& lay = layout(b);
        return step(b, lay, 0, fn);
    }

private:
    struct Layout {
        /// conds[i]: indexes of simple conditions ready once scan i is set;
        /// conds[0] also holds those referencing no local scan.
        std::vector<std::vector<std::size_t>> ready;
        std::vector<std::size_t> last;
    };

    const Stores& stores_;
    const Schema& schema_;
    EvalOptions options_;
    DomainCache domains_;
    std::vector<const Row*> current_;
    std::map<const Block*, Layout> layouts_;
    std::map<std::string, std::vector<Row>> attr_rows_;
    std::map<std::string, std::vector<Row>> domain_rows_;
    std::uint64_t visits_ = 0;

    static void max_pos(const Expr& e, const std::map<int, int>& pos, int& out) {
        if (e.kind == Expr::Kind::Column) {
            auto it = pos.find(e.scan);
            if (it != pos.end())
                out = std::max(out, it->second);
        }
        for (const auto& k : e.kids)
            max_pos(k, pos, out);
        if (e.sub)
            out = std::max(out, static_cast<int>(pos.size()) - 1);
    }

    const Layout& layout(const Block& b) {
        auto it = layouts_.find(&b);
        if (it != layouts_.end())
            return it->second;
        Layout lay;
        std::map<int, int> pos;
        for (std::size_t i = 0; i < b.scans.size(); ++i)
            pos[b.scans[i].id] = static_cast<int>(i);
        lay.ready.resize(b.scans.size() + 1);
        for (std::size_t i = 0; i < b.conds.size(); ++i) {
            const Cond& c = b.conds[i];
            if (c.kind == Cond::Kind::NotExists) {
                lay.last.push_back(i);
                continue;
            }
            int p = -1;
            max_pos(c.lhs, pos, p);
            max_pos(c.rhs, pos, p);
            lay.ready[static_cast<std::size_t>(p + 1)].push_back(i);
        }
        return layouts_.emplace(&b, std::move(lay)).first->second;
    }

    const std::vector<Row>& rows_of(const Scan& s) {
        if (s.kind == Scan::Kind::Domain) {
            auto it = domain_rows_.find(s.name);
            if (it != domain_rows_.end())
                return it->second;
            std::vector<Row> rows;
            for (const auto& v : domains_.of(s.name))
                rows.push_back({v});
            return domain_rows_.emplace(s.name, std::move(rows)).first->second;
        }
        auto it = attr_rows_.find(s.name);
        if (it != attr_rows_.end())
            return it->second;
        const AttributeDecl* attr = schema_.find_attribute(s.name);
        return attr_rows_.emplace(s.name, scan_rows(stores_, schema_, *attr)).first->second;
    }

    bool holds(const Cond& c) {
        switch (c.kind) {
        case Cond::Kind::False: return false;
        case Cond::Kind::InDomain: {
            Value v = eval(c.lhs);
            const auto& dom = domains_.of(c.base);
            return std::binary_search(dom.begin(), dom.end(), v);
        }
        case Cond::Kind::NotExists: return run(*c.sub, [] { return false; });
        case Cond::Kind::Compare:
        case Cond::Kind::NotCompare: {
            Value a = eval(c.lhs);
            Value b = eval(c.rhs);
            if (a.contains_undef() || b.contains_undef())
                return c.kind == Cond::Kind::NotCompare;
            auto o = compare(a, b);
            bool r = false;
            switch (c.op) {
            case CmpOp::Eq: r = o == 0; break;
            case CmpOp::Lt: r = o < 0; break;
            case CmpOp::Le: r = o <= 0; break;
            case CmpOp::Gt: r = o > 0; break;
            case CmpOp::Ge: r = o >= 0; break;
            }
            return c.kind == Cond::Kind::Compare ? r : !r;
        }
        }
        return false;
    }

    bool all_hold(const Block& b, const std::vector<std::size_t>& idx) {
        for (auto i : idx)
            if (!holds(b.conds[i]))
                return false;
        return true;
    }

    bool step(const Block& b, const Layout& lay, std::size_t i, const std::function<bool()>& fn) {
        if (i == 0 && !all_hold(b, lay.ready[0]))
            return true;
        if (i == b.scans.size()) {
            if (!all_hold(b, lay.last))
                return true;
            return fn();
        }
        const Scan& s = b.scans[i];
        for (const auto& row : rows_of(s)) {
            if (++visits_ > options_.max_domain * 10)
                throw Error(Errc::DomainTooLarge, "plan execution exceeds its row budget");
            current_[s.id] = &row;
            if (!all_hold(b, lay.ready[i + 1]))
                continue;
            if (!step(b, lay, i + 1, fn))
                return false;
        }
        return true;
    }
};

} // namespace

Relation execute_compiled(const CompiledQuery& q, const QuerySignature& signature, const Term& root,
                          const Stores& stores, const Schema& schema, const EvalOptions& options) {
    Relation out;
    out.signature = signature;
    Runner runner(root, stores, schema, options, q.scan_count);
    runner.run(q.block, [&] {
        Row row;
        for (const auto& [name, e] : q.outputs) {
            Value v = runner.eval(e);
            if (v.contains_undef())
                return true;
            row.push_back(std::move(v));
        }
        out.rows.insert(std::move(row));
        return true;
    });
    return out;
}

} // namespace lambdaq
