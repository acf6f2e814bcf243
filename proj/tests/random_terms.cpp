#include "support.hpp"

#include <map>
#include <optional>

namespace lqtest {

namespace {

const std::map<std::string, std::vector<Value>>& pools() {
    static const std::map<std::string, std::vector<Value>> p{
        {"Title", {"Jaws", "Lincoln", "Alien", "E.T.", "Up"}},
        {"Director", {"Spielberg", "Scott", "Nolan"}},
        {"Released", {1975, 1979, 1982, 2012}},
        {"Genre", {"Thriller", "Drama", "SciFi"}},
        {"Name", {"Ann", "Bob", "Allstar", "Weaver"}},
        {"Role", {"Hooper", "Ripley"}},
        {"Stars", {3, 4, 5}},
        {"U_ID", {1, 2, 3}},
        {"Birth_y", {1980, 1990}},
    };
    return p;
}

template <class T>
const T& pick(std::mt19937& rng, const std::vector<T>& xs) {
    return xs[std::uniform_int_distribution<std::size_t>(0, xs.size() - 1)(rng)];
}

bool chance(std::mt19937& rng, double p) { return std::uniform_real_distribution<double>(0, 1)(rng) < p; }

std::string graph_literal(const Value& v) { return v.is_string() ? "\"" + v.as_string() + "\"" : display(v); }

} // namespace

RandomWorld random_world(std::mt19937& rng) {
    RandomWorld w;
    const auto& p = pools();
    // A node occasionally carries no property block, leaving it undefined.
    auto node = [&](const std::string& type, const std::string& id, std::initializer_list<const char*> bases) {
        w.graph_lines += "node " + type + " " + id;
        if (chance(rng, 0.1)) {
            w.graph_lines += "\n";
            return;
        }
        std::string props;
        for (const char* base : bases) {
            if (!props.empty())
                props += ", ";
            props += std::string(base) + ": " + graph_literal(pick(rng, p.at(base)));
        }
        w.graph_lines += " {" + props + "}\n";
    };
    for (int i = 1; i <= 3; ++i)
        node("User", "u" + std::to_string(i), {"U_ID", "Name", "Birth_y"});
    for (int i = 1; i <= 3; ++i)
        node("Movie", "m" + std::to_string(i), {"Title", "Director", "Released"});
    for (int u = 1; u <= 3; ++u)
        for (int m = 1; m <= 3; ++m)
            if (chance(rng, 0.35))
                w.graph_lines += "edge Rates u" + std::to_string(u) + " -> m" + std::to_string(m) +
                                 " {Stars: " + display(pick(rng, p.at("Stars"))) + "}\n";
    for (int u = 1; u <= 3; ++u)
        for (int v = 1; v <= 3; ++v)
            if (u != v && chance(rng, 0.3))
                w.graph_lines += "edge FOF u" + std::to_string(u) + " -> u" + std::to_string(v) + "\n";

    w.actors_csv = "Name,Title,Role\n";
    int actors = std::uniform_int_distribution<int>(0, 6)(rng);
    for (int i = 0; i < actors; ++i)
        w.actors_csv += display(pick(rng, p.at("Name"))) + "," + display(pick(rng, p.at("Title"))) + "," +
                        display(pick(rng, p.at("Role"))) + "\n";
    w.movies_csv = "Title,Released,Director,Genre\n";
    int movies = std::uniform_int_distribution<int>(0, 5)(rng);
    for (int i = 0; i < movies; ++i)
        w.movies_csv += display(pick(rng, p.at("Title"))) + "," + display(pick(rng, p.at("Released"))) + "," +
                        display(pick(rng, p.at("Director"))) + "," + display(pick(rng, p.at("Genre"))) + "\n";
    return w;
}

Stores load_world(const RandomWorld& w, const Schema& schema) {
    Stores st;
    st.graph = load_graph_lines(w.graph_lines, schema);
    load_relation_csv("Actors", w.actors_csv, schema, st.rel);
    load_relation_csv("Movies", w.movies_csv, schema, st.rel);
    return st;
}

namespace {

struct AtomSpec {
    std::string attr;
    bool graph;
    /// Entity argument of a graph attribute; empty for relations.
    std::string entity;
    std::vector<std::string> args;
};

const std::vector<AtomSpec>& atom_specs() {
    static const std::vector<AtomSpec> specs{
        {"Movie", true, "Movie", {"Title", "Director", "Released"}},
        {"User", true, "User", {"U_ID", "Name", "Birth_y"}},
        {"FOF", true, "User", {"User"}},
        {"Rates", true, "User", {"Stars", "Movie"}},
        {"Actors", false, "", {"Name", "Title", "Role"}},
        {"Movies", false, "", {"Title", "Released", "Director", "Genre"}},
    };
    return specs;
}

const std::vector<std::string> kQuantBases{"Movie", "User", "Title", "Name", "Genre", "Director", "Released"};
const std::vector<std::string> kOutputBases{"Title", "Name", "Genre", "Director", "User", "Movie", "Released"};

class Gen {
public:
    Gen(std::mt19937& rng, const Schema& schema, const GenOptions& opt) : rng_(rng), schema_(schema), opt_(opt) {}

    std::string fresh() { return "v" + std::to_string(++counter_); }

    static Term var(const Binder& b) { return Term::var(b.name, b.type); }

    std::optional<Binder> var_of(const std::vector<Binder>& ctx, const std::string& base) {
        std::vector<Binder> c;
        for (const auto& b : ctx)
            if (b.type->name() == base)
                c.push_back(b);
        if (c.empty())
            return std::nullopt;
        return pick(rng_, c);
    }

    Term constant(const std::string& base) { return Term::constant(pick(rng_, pools().at(base)), TypeExpr::base(base)); }

    Term arg(const std::string& base, const std::vector<Binder>& ctx, std::vector<Binder>& fresh_vars) {
        auto existing = var_of(ctx, base);
        if (existing && chance(rng_, 0.65))
            return var(*existing);
        if (pools().contains(base) && chance(rng_, 0.4))
            return constant(base);
        Binder b{fresh(), TypeExpr::base(base)};
        fresh_vars.push_back(b);
        return var(b);
    }

    /// One attribute atom; `source` restricts the attribute's source.
    Term atom(const std::vector<Binder>& ctx, std::optional<bool> graph_only = std::nullopt) {
        std::vector<AtomSpec> specs;
        for (const auto& s : atom_specs())
            if (!graph_only || s.graph == *graph_only)
                specs.push_back(s);
        const AtomSpec& s = pick(rng_, specs);
        std::vector<Binder> fresh_vars;
        Term t;
        if (s.graph) {
            Term e = arg(s.entity, ctx, fresh_vars);
            bool props = s.attr == "Movie" || s.attr == "User";
            if (props && chance(rng_, 0.25)) {
                int k = std::uniform_int_distribution<int>(1, 3)(rng_);
                Term rhs = arg(s.args[k - 1], ctx, fresh_vars);
                t = Term::compare(CmpOp::Eq, Term::component(Term::app(Term::attr(s.attr), {e}), k), rhs);
            } else {
                std::vector<Term> args;
                for (const auto& b : s.args)
                    args.push_back(arg(b, ctx, fresh_vars));
                t = Term::app(Term::app(Term::attr(s.attr), {e}), std::move(args));
            }
        } else {
            std::vector<Term> args;
            for (const auto& b : s.args)
                args.push_back(arg(b, ctx, fresh_vars));
            t = Term::app(Term::attr(s.attr), std::move(args));
        }
        if (!fresh_vars.empty())
            t = Term::exists(std::move(fresh_vars), std::move(t));
        return t;
    }

    std::optional<Term> compare(const std::vector<Binder>& ctx) {
        std::vector<Binder> desc;
        for (const auto& b : ctx)
            if (pools().contains(b.type->name()))
                desc.push_back(b);
        if (desc.empty())
            return std::nullopt;
        const Binder& x = pick(rng_, desc);
        const std::string& base = x.type->name();
        bool numeric = schema_.base(base).carrier == Carrier::Number;
        CmpOp op = CmpOp::Eq;
        if (numeric && !opt_.positive_existential)
            op = pick(rng_, std::vector<CmpOp>{CmpOp::Eq, CmpOp::Lt, CmpOp::Le, CmpOp::Gt, CmpOp::Ge});
        Term lhs = var(x);
        if (numeric && chance(rng_, 0.2))
            lhs = Term::arith_op(pick(rng_, std::vector<ArithOp>{ArithOp::Add, ArithOp::Sub}), lhs,
                                 Term::constant(Value(1), TypeExpr::base(base)));
        auto other = var_of(ctx, base);
        Term rhs = other && other->name != x.name && chance(rng_, 0.4) ? var(*other) : constant(base);
        return Term::compare(op, std::move(lhs), std::move(rhs));
    }

    Term count_compare(const std::vector<Binder>& ctx) {
        Binder m{fresh(), TypeExpr::base("Movie")};
        auto inner = ctx;
        inner.push_back(m);
        Term body = atom(inner, true);
        Term lam = Term::lambda({m}, std::move(body));
        CmpOp op = pick(rng_, std::vector<CmpOp>{CmpOp::Eq, CmpOp::Ge, CmpOp::Lt});
        int k = std::uniform_int_distribution<int>(0, 2)(rng_);
        return Term::compare(op, Term::count("Movie", std::move(lam)), Term::constant(Value(k), TypeExpr::base("Number")));
    }

    Term leaf(const std::vector<Binder>& ctx) {
        double u = std::uniform_real_distribution<double>(0, 1)(rng_);
        if (u < 0.3)
            if (auto c = compare(ctx))
                return *c;
        if (u > 0.92 && opt_.allow_count && !opt_.positive_existential)
            return count_compare(ctx);
        return atom(ctx);
    }

    Binder binder() { return Binder{fresh(), TypeExpr::base(pick(rng_, kQuantBases))}; }

    Term formula(int depth, const std::vector<Binder>& ctx) {
        if (depth <= 0 || chance(rng_, 0.3))
            return leaf(ctx);
        if (opt_.positive_existential) {
            if (chance(rng_, 0.5))
                return Term::conj(formula(depth - 1, ctx), formula(depth - 1, ctx));
            Binder b = binder();
            auto inner = ctx;
            inner.push_back(b);
            return Term::exists({b}, formula(depth - 1, inner));
        }
        int k = std::uniform_int_distribution<int>(0, 9)(rng_);
        switch (k) {
        case 0:
        case 1:
        case 2: return Term::conj(formula(depth - 1, ctx), formula(depth - 1, ctx));
        case 3:
            if (opt_.allow_or)
                return Term::disj(formula(depth - 1, ctx), formula(depth - 1, ctx));
            [[fallthrough]];
        case 4: return Term::negate(formula(depth - 1, ctx));
        case 5: return Term::implies(formula(depth - 1, ctx), formula(depth - 1, ctx));
        default: {
            Binder b = binder();
            auto inner = ctx;
            inner.push_back(b);
            Term body = formula(depth - 1, inner);
            return k < 8 ? Term::exists({b}, std::move(body)) : Term::forall({b}, std::move(body));
        }
        }
    }

    /// Formula using attributes of one source only.
    Term single_source(int depth, const std::vector<Binder>& ctx, bool graph) {
        if (depth <= 0 || chance(rng_, 0.4))
            return atom(ctx, graph);
        int k = std::uniform_int_distribution<int>(0, 3)(rng_);
        if (k == 0)
            return Term::conj(single_source(depth - 1, ctx, graph), single_source(depth - 1, ctx, graph));
        if (k == 1)
            return Term::negate(single_source(depth - 1, ctx, graph));
        if (k == 2)
            return Term::disj(atom(ctx, graph), atom(ctx, graph));
        Binder b = binder();
        auto inner = ctx;
        inner.push_back(b);
        return Term::exists({b}, single_source(depth - 1, inner, graph));
    }

    Term translatable_item(const std::vector<Binder>& ctx) {
        int k = std::uniform_int_distribution<int>(0, 9)(rng_);
        bool graph = chance(rng_, 0.5);
        if (k < 4)
            return atom(ctx);
        if (k < 6)
            if (auto c = compare(ctx))
                return *c;
        if (k < 8)
            return Term::negate(single_source(opt_.max_depth - 1, ctx, graph));
        Binder b = binder();
        auto inner = ctx;
        inner.push_back(b);
        return Term::forall({b}, Term::implies(atom(inner, graph), atom(inner, graph)));
    }

    Term translatable_body(const std::vector<Binder>& ctx) {
        int n = std::uniform_int_distribution<int>(1, 3)(rng_);
        std::vector<Term> items{atom(ctx)};
        for (int i = 1; i < n; ++i)
            items.push_back(translatable_item(ctx));
        std::shuffle(items.begin(), items.end(), rng_);
        return make_conjunction(std::move(items));
    }

    Term query() {
        if (opt_.translatable && opt_.allow_count && chance(rng_, 0.2))
            return count_query();
        int k = std::uniform_int_distribution<int>(1, 2)(rng_);
        std::vector<Binder> outs;
        for (int i = 0; i < k; ++i)
            outs.push_back(Binder{i == 0 ? "a" : "b", TypeExpr::base(pick(rng_, kOutputBases))});
        Term body;
        if (opt_.translatable)
            body = translatable_body(outs);
        else if (chance(rng_, 0.5))
            body = Term::conj(atom(outs), formula(opt_.max_depth - 1, outs));
        else
            body = formula(opt_.max_depth, outs);
        return Term::lambda(std::move(outs), std::move(body));
    }

    Term count_query() {
        Binder u{"u", TypeExpr::base("User")};
        Binder g{"g", TypeExpr::base(pick(rng_, std::vector<std::string>{"Genre", "Director", "Title"}))};
        Binder n{"n", TypeExpr::base("Number")};
        Binder m{fresh(), TypeExpr::base("Movie")};
        std::vector<Binder> inner{u, g, m};
        Term body = translatable_body(inner);
        Term def = Term::count("Movie", Term::lambda({m}, std::move(body)));
        return Term::lambda({u, g, n}, Term::compare(CmpOp::Eq, var(n), std::move(def)));
    }

private:
    std::mt19937& rng_;
    const Schema& schema_;
    GenOptions opt_;
    int counter_ = 0;
};

} // namespace

Term random_query(std::mt19937& rng, const Schema& schema, const GenOptions& opt) {
    return Gen(rng, schema, opt).query();
}

Term random_formula(std::mt19937& rng, const Schema& schema, const std::vector<Binder>& context,
                    const GenOptions& opt) {
    return Gen(rng, schema, opt).formula(opt.max_depth, context);
}

} // namespace lqtest
