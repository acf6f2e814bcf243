#include "lambdaq/eval.hpp"

#include "lambdaq/error.hpp"
#include "lambdaq/typecheck.hpp"

#include <algorithm>

namespace lambdaq {

bool enumerable_base(const TypeExpr& type, const Schema& schema) {
    if (type.is_tuple()) {
        for (const auto& c : type.components())
            if (!enumerable_base(c, schema))
                return false;
        return true;
    }
    if (!type.is_base())
        return false;
    const std::string& name = type.name();
    if (name == kBoolBase || schema.is_entity(name))
        return true;
    for (const auto& alias : schema.alias_class(name))
        for (const auto& attr : schema.attributes())
            for (const auto& col : schema.row_layout(attr))
                if (col == alias)
                    return true;
    return false;
}

namespace {

/// The other side of `v = e` / `e = v` when `v` does not occur in e.
std::optional<Term> definition_of(const std::string& v, const Term& conjunct) {
    if (conjunct.kind != TermKind::Compare || conjunct.cmp != CmpOp::Eq)
        return std::nullopt;
    for (int side = 0; side < 2; ++side) {
        const Term& lhs = conjunct.kids[side];
        const Term& rhs = conjunct.kids[1 - side];
        if (lhs.kind == TermKind::Var && lhs.name == v && !free_vars(rhs).contains(v))
            return rhs;
    }
    return std::nullopt;
}

} // namespace

BindingPlan analyze_range_restriction(const Term& query, const Schema& schema) {
    if (query.kind != TermKind::Lambda)
        throw Error(Errc::NotLambda, "query must be a lambda abstraction", query.span);
    auto parts = conjuncts(query.body());
    std::vector<Binder> pending = query.binders;
    std::set<std::string> bound;
    BindingPlan plan;

    auto derivation = [&](const Binder& b) -> std::optional<Term> {
        for (const auto& c : parts) {
            auto def = definition_of(b.name, c);
            if (!def)
                continue;
            auto fv = free_vars(*def);
            if (std::all_of(fv.begin(), fv.end(), [&](const std::string& x) { return bound.contains(x); }))
                return def;
        }
        return std::nullopt;
    };

    while (!pending.empty()) {
        bool progressed = false;
        for (auto it = pending.begin(); it != pending.end(); ++it) {
            if (auto def = derivation(*it)) {
                plan.steps.push_back({Binding::Kind::Derive, it->name, *it->type, std::move(def)});
                bound.insert(it->name);
                pending.erase(it);
                progressed = true;
                break;
            }
        }
        if (progressed)
            continue;
        for (auto it = pending.begin(); it != pending.end(); ++it) {
            if (enumerable_base(*it->type, schema)) {
                plan.steps.push_back({Binding::Kind::Enumerate, it->name, *it->type, std::nullopt});
                bound.insert(it->name);
                pending.erase(it);
                progressed = true;
                break;
            }
        }
        if (!progressed) {
            const Binder& b = pending.front();
            throw Error(Errc::UnsafeQuery,
                        "output variable '" + b.name + "' of type " + render_type(*b.type) +
                            " is neither enumerable from stored data nor defined by an equality",
                        query.span);
        }
    }
    return plan;
}

// ---------------------------------------------------------------------------

DomainCache::DomainCache(const Stores& stores, const Schema& schema,
                         std::vector<std::pair<std::string, Value>> constants)
    : stores_(stores), schema_(schema), constants_(std::move(constants)) {}

const std::vector<Value>& DomainCache::of(const std::string& base) {
    auto it = cache_.find(base);
    if (it != cache_.end())
        return it->second;
    std::vector<Value> extra;
    if (base == kBoolBase) {
        extra = {Value(false), Value(true)};
    } else {
        for (const auto& [b, v] : constants_)
            if (schema_.compatible(b, base))
                extra.push_back(v);
    }
    return cache_.emplace(base, active_domain(base, extra, stores_, schema_)).first->second;
}

std::vector<Value> DomainCache::of_type(const TypeExpr& type) {
    if (type.is_base())
        return of(type.name());
    if (!type.is_tuple())
        throw Error(Errc::UnsupportedConstruct, "cannot range over function type " + render_type(type));
    std::vector<std::vector<Value>> partial{{}};
    for (const auto& c : type.components()) {
        auto dom = of_type(c);
        std::vector<std::vector<Value>> next;
        for (const auto& p : partial)
            for (const auto& v : dom) {
                next.push_back(p);
                next.back().push_back(v);
            }
        partial = std::move(next);
    }
    std::vector<Value> out;
    out.reserve(partial.size());
    for (auto& p : partial)
        out.push_back(Value::tuple(std::move(p)));
    return out;
}

// ---------------------------------------------------------------------------

namespace detail {

bool truth(const Value& v) { return v.is_bool() && v.as_bool(); }

class Evaluator {
public:
    Evaluator(const Term& root, const Stores& stores, const Schema& schema, const EvalOptions& options)
        : stores_(stores), schema_(schema), options_(options), domains_(stores, schema, constants(root)) {}

    DomainCache& domains() { return domains_; }

    void bind(const std::string& name, Value v) { env_.emplace_back(name, std::move(v)); }
    void unbind(std::size_t n) { env_.resize(env_.size() - n); }
    std::vector<std::pair<std::string, Value>>& env() { return env_; }

    Value eval(const Term& t) {
        switch (t.kind) {
        case TermKind::Var: return lookup(t);
        case TermKind::Const: return t.value;
        case TermKind::AttrRef: return materialize_attr(t);
        case TermKind::App: return apply(t);
        case TermKind::Lambda: return materialize_lambda(t);
        case TermKind::TupleCons: {
            std::vector<Value> items;
            for (const auto& k : t.kids)
                items.push_back(eval(k));
            return Value::tuple(std::move(items));
        }
        case TermKind::Component: {
            Value tv = eval(t.kids[0]);
            if (!tv.is_tuple())
                return Undef{};
            return tv.tuple_items().at(static_cast<std::size_t>(t.index - 1));
        }
        case TermKind::Not: return !truth(eval(t.kids[0]));
        case TermKind::And: return truth(eval(t.kids[0])) && truth(eval(t.kids[1]));
        case TermKind::Or: return truth(eval(t.kids[0])) || truth(eval(t.kids[1]));
        case TermKind::Implies: return !truth(eval(t.kids[0])) || truth(eval(t.kids[1]));
        case TermKind::Exists: return quantify(t, true);
        case TermKind::Forall: return quantify(t, false);
        case TermKind::Count: {
            Value set = eval(t.kids[0]);
            if (!set.is_set())
                return Undef{};
            return count_value(set);
        }
        case TermKind::Compare: return compare_values(t.cmp, eval(t.kids[0]), eval(t.kids[1]));
        case TermKind::Arith: {
            Value a = eval(t.kids[0]);
            Value b = eval(t.kids[1]);
            if (!a.is_number() || !b.is_number())
                return Undef{};
            switch (t.arith) {
            case ArithOp::Add: return a.as_number() + b.as_number();
            case ArithOp::Sub: return a.as_number() - b.as_number();
            case ArithOp::Mul: return a.as_number() * b.as_number();
            }
            return Undef{};
        }
        }
        return Undef{};
    }

    /// Calls `fn` for every assignment of `binders` over their active domains;
    /// stops early when fn returns false.
    template <class Fn>
    void for_each_assignment(const std::vector<Binder>& binders, Fn&& fn) {
        std::vector<std::vector<Value>> doms;
        std::uint64_t product = 1;
        for (const auto& b : binders) {
            doms.push_back(domains_.of_type(*b.type));
            product *= std::max<std::uint64_t>(doms.back().size(), 1);
            if (product > options_.max_domain)
                throw Error(Errc::DomainTooLarge, "enumeration exceeds " + std::to_string(options_.max_domain) +
                                                      " candidate assignments");
            if (doms.back().empty())
                return;
        }
        std::size_t mark = env_.size();
        for (const auto& b : binders)
            env_.emplace_back(b.name, Value{});
        std::vector<std::size_t> idx(binders.size(), 0);
        while (true) {
            for (std::size_t i = 0; i < binders.size(); ++i)
                env_[mark + i].second = doms[i][idx[i]];
            if (!fn())
                break;
            bool done = true;
            for (std::size_t k = binders.size(); k-- > 0;) {
                if (++idx[k] < doms[k].size()) {
                    done = false;
                    break;
                }
                idx[k] = 0;
            }
            if (done)
                break;
        }
        env_.resize(mark);
    }

private:
    const Stores& stores_;
    const Schema& schema_;
    EvalOptions options_;
    DomainCache domains_;
    std::vector<std::pair<std::string, Value>> env_;

    Value lookup(const Term& v) const {
        for (auto it = env_.rbegin(); it != env_.rend(); ++it)
            if (it->first == v.name)
                return it->second;
        throw Error(Errc::UnknownVariable, "unbound variable '" + v.name + "'", v.span);
    }

    static Value compare_values(CmpOp op, const Value& a, const Value& b) {
        if (a.contains_undef() || b.contains_undef())
            return false;
        auto c = compare(a, b);
        switch (op) {
        case CmpOp::Eq: return c == 0;
        case CmpOp::Lt: return c < 0;
        case CmpOp::Le: return c <= 0;
        case CmpOp::Gt: return c > 0;
        case CmpOp::Ge: return c >= 0;
        }
        return false;
    }

    Value quantify(const Term& t, bool exists) {
        bool result = !exists;
        for_each_assignment(t.binders, [&] {
            bool v = truth(eval(t.body()));
            if (v == exists) {
                result = exists;
                return false;
            }
            return true;
        });
        return result;
    }

    static Value pack(std::vector<Value> items) {
        if (items.size() == 1)
            return std::move(items.front());
        return Value::tuple(std::move(items));
    }

    Value materialize_lambda(const Term& t) {
        const Term& body = t.body();
        std::vector<Value> members;
        for_each_assignment(t.binders, [&] {
            if (truth(eval(body))) {
                std::vector<Value> row;
                for (std::size_t i = 0; i < t.binders.size(); ++i)
                    row.push_back(env_[env_.size() - t.binders.size() + i].second);
                members.push_back(pack(std::move(row)));
            }
            return true;
        });
        return Value::set(std::move(members));
    }

    Value materialize_attr(const Term& t) {
        const AttributeDecl& attr = schema_.resolve_attribute(t.name);
        if (attr.shape != Shape::Relation)
            throw Error(Errc::UnsupportedConstruct, "attribute '" + t.name + "' used without an argument", t.span);
        std::vector<Value> members;
        for (const auto& row : stores_.rel.tuples(attr.name))
            members.push_back(pack(row));
        return Value::set(std::move(members));
    }

    Value apply(const Term& t) {
        const Term& fn = t.kids[0];
        std::vector<Value> args;
        for (std::size_t i = 1; i < t.kids.size(); ++i)
            args.push_back(eval(t.kids[i]));

        if (fn.kind == TermKind::Lambda) {
            for (const auto& a : args)
                if (a.is_undef())
                    return Undef{};
            std::size_t mark = env_.size();
            for (std::size_t i = 0; i < fn.binders.size(); ++i)
                env_.emplace_back(fn.binders[i].name, args[i]);
            Value v = eval(fn.body());
            env_.resize(mark);
            return v;
        }
        if (fn.kind == TermKind::AttrRef) {
            const AttributeDecl& attr = schema_.resolve_attribute(fn.name);
            if (attr.shape == Shape::Relation)
                return test_membership(stores_, schema_, attr.name, args);
            const Value& arg = args.front();
            if (!arg.is_entity())
                return Undef{};
            if (is_multivalued(attr.shape))
                return stores_.graph.members(attr.name, arg.as_entity().id);
            return stores_.graph.lookup(attr.name, arg.as_entity().id);
        }
        Value f = eval(fn);
        if (f.is_set()) {
            Value probe = pack(std::move(args));
            if (probe.contains_undef())
                return false;
            return f.set_contains(probe);
        }
        if (f.is_tuple()) {
            const auto& items = f.tuple_items();
            if (items.size() != args.size())
                return false;
            for (std::size_t i = 0; i < items.size(); ++i)
                if (!truth(compare_values(CmpOp::Eq, items[i], args[i])))
                    return false;
            return true;
        }
        return Undef{};
    }
};

} // namespace detail

using detail::truth;

TermEvaluator::TermEvaluator(const Term& root, const Stores& stores, const Schema& schema, const EvalOptions& options)
    : impl_(std::make_unique<detail::Evaluator>(root, stores, schema, options)) {}

TermEvaluator::~TermEvaluator() = default;

Value TermEvaluator::eval(const Term& t, const std::vector<std::pair<std::string, Value>>& env) {
    auto saved = std::move(impl_->env());
    impl_->env() = env;
    Value v = impl_->eval(t);
    impl_->env() = std::move(saved);
    return v;
}

DomainCache& TermEvaluator::domains() { return impl_->domains(); }

Relation eval_query(const Term& query, const Stores& stores, const Schema& schema, const EvalOptions& options) {
    return eval_query(query, stores, schema, options, query);
}

Relation eval_query(const Term& query, const Stores& stores, const Schema& schema, const EvalOptions& options,
                    const Term& constants_root) {
    Relation out;
    out.signature = check_query(query, schema);
    BindingPlan plan = analyze_range_restriction(query, schema);
    detail::Evaluator ev(constants_root, stores, schema, options);

    std::uint64_t product = 1;
    std::vector<std::vector<Value>> doms(plan.steps.size());
    for (std::size_t i = 0; i < plan.steps.size(); ++i) {
        if (plan.steps[i].kind != Binding::Kind::Enumerate)
            continue;
        doms[i] = ev.domains().of_type(plan.steps[i].type);
        product *= std::max<std::uint64_t>(doms[i].size(), 1);
        if (product > options.max_domain)
            throw Error(Errc::DomainTooLarge,
                        "enumeration exceeds " + std::to_string(options.max_domain) + " candidate assignments",
                        query.span);
    }

    const Term& body = query.body();
    std::vector<Value> assignment(plan.steps.size());
    // Depth-first over the binding plan.
    auto step = [&](auto& self, std::size_t i) -> void {
        if (i == plan.steps.size()) {
            if (!truth(ev.eval(body)))
                return;
            Row row;
            for (const auto& [name, type] : out.signature.columns) {
                for (std::size_t k = 0; k < plan.steps.size(); ++k)
                    if (plan.steps[k].var == name)
                        row.push_back(assignment[k]);
            }
            out.rows.insert(std::move(row));
            return;
        }
        const Binding& b = plan.steps[i];
        if (b.kind == Binding::Kind::Derive) {
            Value v = ev.eval(*b.definition);
            if (v.contains_undef())
                return;
            assignment[i] = v;
            ev.bind(b.var, std::move(v));
            self(self, i + 1);
            ev.unbind(1);
            return;
        }
        for (const auto& v : doms[i]) {
            assignment[i] = v;
            ev.bind(b.var, v);
            self(self, i + 1);
            ev.unbind(1);
        }
    };
    step(step, 0);
    return out;
}

Value eval_closed(const Term& t, const Stores& stores, const Schema& schema, const EvalOptions& options) {
    if (!free_vars(t).empty())
        throw Error(Errc::NotClosed, "term has free variables", t.span);
    detail::Evaluator ev(t, stores, schema, options);
    return ev.eval(t);
}

} // namespace lambdaq
