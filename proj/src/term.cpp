#include "lambdaq/term.hpp"

#include <algorithm>
#include <numeric>

namespace lambdaq {

std::string_view to_string(CmpOp op) {
    switch (op) {
    case CmpOp::Eq: return "=";
    case CmpOp::Lt: return "<";
    case CmpOp::Le: return "<=";
    case CmpOp::Gt: return ">";
    case CmpOp::Ge: return ">=";
    }
    return "?";
}

std::string_view to_string(ArithOp op) {
    switch (op) {
    case ArithOp::Add: return "+";
    case ArithOp::Sub: return "-";
    case ArithOp::Mul: return "*";
    }
    return "?";
}

namespace {
Term node(TermKind kind, std::vector<Term> kids) {
    Term t;
    t.kind = kind;
    t.kids = std::move(kids);
    return t;
}
} // namespace

Term Term::var(std::string name, std::optional<TypeExpr> type) {
    Term t;
    t.kind = TermKind::Var;
    t.name = std::move(name);
    t.type = std::move(type);
    return t;
}

Term Term::constant(Value v, std::optional<TypeExpr> base) {
    Term t;
    t.kind = TermKind::Const;
    t.value = std::move(v);
    t.type = std::move(base);
    return t;
}

Term Term::attr(std::string name) {
    Term t;
    t.kind = TermKind::AttrRef;
    t.name = std::move(name);
    return t;
}

Term Term::app(Term fn, std::vector<Term> args) {
    std::vector<Term> kids;
    kids.reserve(args.size() + 1);
    kids.push_back(std::move(fn));
    for (auto& a : args)
        kids.push_back(std::move(a));
    return node(TermKind::App, std::move(kids));
}

Term Term::lambda(std::vector<Binder> params, Term body) {
    Term t = node(TermKind::Lambda, {std::move(body)});
    t.binders = std::move(params);
    return t;
}

Term Term::tuple(std::vector<Term> components) { return node(TermKind::TupleCons, std::move(components)); }

Term Term::component(Term tuple, int index) {
    Term t = node(TermKind::Component, {std::move(tuple)});
    t.index = index;
    return t;
}

Term Term::negate(Term f) { return node(TermKind::Not, {std::move(f)}); }
Term Term::conj(Term a, Term b) { return node(TermKind::And, {std::move(a), std::move(b)}); }
Term Term::disj(Term a, Term b) { return node(TermKind::Or, {std::move(a), std::move(b)}); }
Term Term::implies(Term a, Term b) { return node(TermKind::Implies, {std::move(a), std::move(b)}); }

Term Term::exists(std::vector<Binder> vars, Term body) {
    Term t = node(TermKind::Exists, {std::move(body)});
    t.binders = std::move(vars);
    return t;
}

Term Term::forall(std::vector<Binder> vars, Term body) {
    Term t = node(TermKind::Forall, {std::move(body)});
    t.binders = std::move(vars);
    return t;
}

Term Term::count(std::string element_base, Term set) {
    Term t = node(TermKind::Count, {std::move(set)});
    t.name = std::move(element_base);
    return t;
}

Term Term::compare(CmpOp op, Term lhs, Term rhs) {
    Term t = node(TermKind::Compare, {std::move(lhs), std::move(rhs)});
    t.cmp = op;
    return t;
}

Term Term::arith_op(ArithOp op, Term lhs, Term rhs) {
    Term t = node(TermKind::Arith, {std::move(lhs), std::move(rhs)});
    t.arith = op;
    return t;
}

// ---------------------------------------------------------------------------

namespace {
void collect_free(const Term& t, std::vector<std::string>& bound, std::set<std::string>& out) {
    if (t.kind == TermKind::Var) {
        if (std::find(bound.begin(), bound.end(), t.name) == bound.end())
            out.insert(t.name);
        return;
    }
    std::size_t mark = bound.size();
    for (const auto& b : t.binders)
        bound.push_back(b.name);
    for (const auto& k : t.kids)
        collect_free(k, bound, out);
    bound.resize(mark);
}
} // namespace

std::set<std::string> free_vars(const Term& t) {
    std::set<std::string> out;
    std::vector<std::string> bound;
    collect_free(t, bound, out);
    return out;
}

// ---------------------------------------------------------------------------

namespace {

class AlphaMatcher {
public:
    bool eq(const Term& a, const Term& b) {
        if (a.kind != b.kind)
            return false;
        switch (a.kind) {
        case TermKind::Var: {
            if (a.type && b.type && *a.type != *b.type)
                return false;
            auto la = lookup(left_, a.name);
            auto rb = lookup(right_, b.name);
            if (la && rb)
                return *la == *rb;
            return !la && !rb && a.name == b.name;
        }
        case TermKind::Const: return a.value == b.value && a.type == b.type;
        case TermKind::AttrRef: return a.name == b.name;
        case TermKind::Lambda: {
            if (a.binders.size() != b.binders.size())
                return false;
            for (std::size_t i = 0; i < a.binders.size(); ++i)
                if (a.binders[i].type != b.binders[i].type)
                    return false;
            std::size_t ml = left_.size(), mr = right_.size();
            for (std::size_t i = 0; i < a.binders.size(); ++i) {
                int id = next_++;
                left_.emplace_back(a.binders[i].name, id);
                right_.emplace_back(b.binders[i].name, id);
            }
            bool ok = eq(a.body(), b.body());
            left_.resize(ml);
            right_.resize(mr);
            return ok;
        }
        case TermKind::Exists:
        case TermKind::Forall: return eq_quantifier_chain(a, b);
        default: break;
        }
        if (a.index != b.index || a.name != b.name || a.kids.size() != b.kids.size())
            return false;
        if (a.kind == TermKind::Compare && a.cmp != b.cmp)
            return false;
        if (a.kind == TermKind::Arith && a.arith != b.arith)
            return false;
        for (std::size_t i = 0; i < a.kids.size(); ++i)
            if (!eq(a.kids[i], b.kids[i]))
                return false;
        return true;
    }

private:
    std::vector<std::pair<std::string, int>> left_, right_;
    int next_ = 0;

    static std::optional<int> lookup(const std::vector<std::pair<std::string, int>>& env, const std::string& name) {
        for (auto it = env.rbegin(); it != env.rend(); ++it)
            if (it->first == name)
                return it->second;
        return std::nullopt;
    }

    static const Term& chain(const Term& t, std::vector<Binder>& out) {
        const Term* cur = &t;
        while (true) {
            out.insert(out.end(), cur->binders.begin(), cur->binders.end());
            if (cur->body().kind != t.kind)
                return cur->body();
            cur = &cur->body();
        }
    }

    bool eq_quantifier_chain(const Term& a, const Term& b) {
        std::vector<Binder> ba, bb;
        const Term& body_a = chain(a, ba);
        const Term& body_b = chain(b, bb);
        if (ba.size() != bb.size())
            return false;
        std::vector<std::size_t> perm(bb.size());
        std::iota(perm.begin(), perm.end(), 0);
        // perm[i] = index in bb matched with ba[i]
        do {
            bool types_ok = true;
            for (std::size_t i = 0; i < ba.size() && types_ok; ++i)
                types_ok = ba[i].type == bb[perm[i]].type;
            if (!types_ok)
                continue;
            std::size_t ml = left_.size(), mr = right_.size();
            int base = next_;
            next_ += static_cast<int>(ba.size());
            std::vector<int> right_ids(bb.size());
            for (std::size_t i = 0; i < ba.size(); ++i) {
                left_.emplace_back(ba[i].name, base + static_cast<int>(i));
                right_ids[perm[i]] = base + static_cast<int>(i);
            }
            for (std::size_t j = 0; j < bb.size(); ++j)
                right_.emplace_back(bb[j].name, right_ids[j]);
            bool ok = eq(body_a, body_b);
            left_.resize(ml);
            right_.resize(mr);
            if (ok)
                return true;
        } while (std::next_permutation(perm.begin(), perm.end()));
        return false;
    }
};

} // namespace

bool alpha_equal(const Term& a, const Term& b) { return AlphaMatcher().eq(a, b); }

// ---------------------------------------------------------------------------

std::optional<std::string> well_formed(const Term& t) {
    if (t.is_binder()) {
        if (t.binders.empty())
            return "binder list is empty";
        for (std::size_t i = 0; i < t.binders.size(); ++i)
            for (std::size_t j = i + 1; j < t.binders.size(); ++j)
                if (t.binders[i].name == t.binders[j].name)
                    return "duplicate binder '" + t.binders[i].name + "'";
    }
    switch (t.kind) {
    case TermKind::App:
        if (t.kids.size() < 2)
            return "application without arguments";
        break;
    case TermKind::Component:
        if (t.index < 1)
            return "component index must be >= 1";
        break;
    case TermKind::Const:
        if (t.value.contains_undef())
            return "UNDEF is not a literal";
        break;
    case TermKind::Count:
        if (t.name.empty())
            return "COUNT needs an element base";
        break;
    case TermKind::TupleCons:
        if (t.kids.empty())
            return "empty tuple";
        break;
    default: break;
    }
    for (const auto& k : t.kids)
        if (auto err = well_formed(k))
            return err;
    return std::nullopt;
}

void check_well_formed(const Term& t) {
    if (auto err = well_formed(t))
        throw Error(Errc::IllFormed, *err, t.span);
}

std::vector<Term> conjuncts(const Term& t) {
    if (t.kind != TermKind::And)
        return {t};
    auto out = conjuncts(t.kids[0]);
    auto rhs = conjuncts(t.kids[1]);
    out.insert(out.end(), rhs.begin(), rhs.end());
    return out;
}

Term make_conjunction(std::vector<Term> parts) {
    if (parts.empty())
        return Term::constant(true, TypeExpr::base(std::string(kBoolBase)));
    Term out = std::move(parts.front());
    for (std::size_t i = 1; i < parts.size(); ++i)
        out = Term::conj(std::move(out), std::move(parts[i]));
    return out;
}

namespace {
void collect_attrs(const Term& t, std::vector<std::string>& out) {
    if (t.kind == TermKind::AttrRef)
        out.push_back(t.name);
    for (const auto& k : t.kids)
        collect_attrs(k, out);
}

void collect_consts(const Term& t, std::vector<std::pair<std::string, Value>>& out) {
    if (t.kind == TermKind::Const)
        out.emplace_back(t.type && t.type->is_base() ? t.type->name() : std::string(), t.value);
    for (const auto& k : t.kids)
        collect_consts(k, out);
}

void collect_names(const Term& t, std::set<std::string>& out) {
    if (t.kind == TermKind::Var)
        out.insert(t.name);
    for (const auto& b : t.binders)
        out.insert(b.name);
    for (const auto& k : t.kids)
        collect_names(k, out);
}
} // namespace

std::vector<std::string> attr_refs(const Term& t) {
    std::vector<std::string> out;
    collect_attrs(t, out);
    return out;
}

std::vector<std::pair<std::string, Value>> constants(const Term& t) {
    std::vector<std::pair<std::string, Value>> out;
    collect_consts(t, out);
    return out;
}

std::set<std::string> all_var_names(const Term& t) {
    std::set<std::string> out;
    collect_names(t, out);
    return out;
}

std::string fresh_name(std::string_view hint, std::set<std::string>& used) {
    std::string base(hint.empty() ? "v" : hint);
    if (!used.count(base)) {
        used.insert(base);
        return base;
    }
    for (int i = 1;; ++i) {
        std::string cand = base + std::to_string(i);
        if (!used.count(cand)) {
            used.insert(cand);
            return cand;
        }
    }
}

Term rename_free(const Term& t, const std::string& from, const std::string& to) {
    if (t.kind == TermKind::Var) {
        Term out = t;
        if (t.name == from)
            out.name = to;
        return out;
    }
    if (t.is_binder()) {
        for (const auto& b : t.binders)
            if (b.name == from)
                return t;
        Term out = t;
        auto fv = free_vars(t.body());
        if (fv.count(from)) {
            // Move any binder named `to` out of the way first.
            auto used = all_var_names(t);
            used.insert(to);
            for (auto& b : out.binders) {
                if (b.name == to) {
                    std::string fresh = fresh_name(to, used);
                    out.kids[0] = rename_free(out.kids[0], b.name, fresh);
                    b.name = fresh;
                }
            }
        }
        out.kids[0] = rename_free(out.kids[0], from, to);
        return out;
    }
    Term out = t;
    for (auto& k : out.kids)
        k = rename_free(k, from, to);
    return out;
}

} // namespace lambdaq
