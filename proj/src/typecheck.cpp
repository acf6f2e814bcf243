#include "lambdaq/typecheck.hpp"

#include "lambdaq/error.hpp"

namespace lambdaq {

void TypeEnv::push(const std::vector<Binder>& frame) {
    std::vector<std::pair<std::string, TypeExpr>> f;
    for (const auto& b : frame) {
        if (!b.type)
            throw Error(Errc::AmbiguousVariable, "variable '" + b.name + "' has no type");
        f.emplace_back(b.name, *b.type);
    }
    frames_.push_back(std::move(f));
}

void TypeEnv::pop() { frames_.pop_back(); }

const TypeExpr* TypeEnv::lookup(const std::string& name) const {
    for (auto f = frames_.rbegin(); f != frames_.rend(); ++f)
        for (auto& [n, t] : *f)
            if (n == name)
                return &t;
    return nullptr;
}

TypeExpr literal_base(const Value& v) {
    if (v.is_number()) return TypeExpr::base(std::string(kNumberBase));
    if (v.is_bool()) return TypeExpr::base(std::string(kBoolBase));
    if (v.is_date()) return TypeExpr::base(std::string(kDateBase));
    return TypeExpr::base(std::string(kStringBase));
}

namespace {

const TypeExpr& bool_type() {
    static const TypeExpr t = TypeExpr::base(std::string(kBoolBase));
    return t;
}

bool is_bool(const TypeExpr& t) { return t.is_base() && t.name() == kBoolBase; }

[[noreturn]] void mismatch(const Term& at, const std::string& what) { throw Error(Errc::TypeMismatch, what, at.span); }

/// Structural equality where base leaves may be alias-compatible.
bool compatible_types(const TypeExpr& a, const TypeExpr& b, const Schema& schema) {
    if (a.kind() != b.kind())
        return false;
    if (a.is_base())
        return schema.compatible(a.name(), b.name());
    auto ca = a.components(), cb = b.components();
    if (ca.size() != cb.size())
        return false;
    for (std::size_t i = 0; i < ca.size(); ++i)
        if (!compatible_types(ca[i], cb[i], schema))
            return false;
    return true;
}

class Checker {
public:
    Checker(TypeEnv& env, const Schema& schema) : env_(env), schema_(schema) {}

    TypeExpr infer(const Term& t) {
        switch (t.kind) {
        case TermKind::Var: {
            const auto* bound = env_.lookup(t.name);
            if (!bound)
                throw Error(Errc::UnknownVariable, "unbound variable '" + t.name + "'", t.span);
            if (t.type && *t.type != *bound)
                mismatch(t, "variable '" + t.name + "' is bound as " + render_type(*bound) + " but tagged " +
                                render_type(*t.type));
            return *bound;
        }
        case TermKind::Const: {
            TypeExpr base = t.type ? *t.type : literal_base(t.value);
            schema_.check_type(base);
            if (!schema_.validate_value(t.value, base))
                mismatch(t, "literal " + to_literal(t.value) + " is not a " + render_type(base) + " value");
            return base;
        }
        case TermKind::AttrRef: return schema_.resolve_attribute(t.name).type;
        case TermKind::App: return infer_app(t);
        case TermKind::Lambda: {
            env_.push(t.binders);
            TypeExpr body = infer(t.body());
            env_.pop();
            std::vector<TypeExpr> params;
            for (const auto& b : t.binders)
                params.push_back(*b.type);
            return TypeExpr::func(std::move(body), std::move(params));
        }
        case TermKind::TupleCons: {
            std::vector<TypeExpr> comps;
            for (const auto& k : t.kids)
                comps.push_back(infer(k));
            return TypeExpr::tuple(std::move(comps));
        }
        case TermKind::Component: {
            TypeExpr tt = infer(t.kids[0]);
            if (!tt.is_tuple())
                mismatch(t, "component selection on non-tuple type " + render_type(tt));
            if (t.index < 1 || static_cast<std::size_t>(t.index) > tt.components().size())
                throw Error(Errc::ComponentOutOfRange,
                            "component " + std::to_string(t.index) + " of " + render_type(tt), t.span);
            return tt.components()[t.index - 1];
        }
        case TermKind::Not:
        case TermKind::And:
        case TermKind::Or:
        case TermKind::Implies:
            for (const auto& k : t.kids)
                if (!is_bool(infer(k)))
                    mismatch(k, "connective operand must be Bool");
            return bool_type();
        case TermKind::Exists:
        case TermKind::Forall: {
            env_.push(t.binders);
            TypeExpr body = infer(t.body());
            env_.pop();
            if (!is_bool(body))
                throw Error(Errc::NonBoolQuantifierBody, "quantifier body has type " + render_type(body), t.span);
            return bool_type();
        }
        case TermKind::Count: {
            schema_.base(t.name);
            TypeExpr set = infer(t.kids[0]);
            if (set != bool_func({TypeExpr::base(t.name)}))
                mismatch(t, "COUNT_" + t.name + " expects (Bool: " + t.name + "), got " + render_type(set));
            return TypeExpr::base(std::string(kNumberBase));
        }
        case TermKind::Compare: {
            TypeExpr l = infer(t.kids[0]);
            TypeExpr r = infer(t.kids[1]);
            if (!compatible_types(l, r, schema_))
                mismatch(t, "cannot compare " + render_type(l) + " with " + render_type(r));
            if (t.cmp != CmpOp::Eq && !(l.is_base() && schema_.is_descriptive(l.name())))
                mismatch(t, "ordering comparison on " + render_type(l));
            return bool_type();
        }
        case TermKind::Arith: {
            TypeExpr l = infer(t.kids[0]);
            TypeExpr r = infer(t.kids[1]);
            auto numeric = [&](const TypeExpr& x) {
                return x.is_base() && schema_.is_descriptive(x.name()) &&
                       schema_.base(x.name()).carrier == Carrier::Number;
            };
            if (!numeric(l) || !numeric(r) || !schema_.compatible(l.name(), r.name()))
                mismatch(t, "arithmetic needs Number operands of one type, got " + render_type(l) + " and " +
                                render_type(r));
            return l;
        }
        }
        mismatch(t, "unknown term");
    }

private:
    TypeEnv& env_;
    const Schema& schema_;

    TypeExpr infer_app(const Term& t) {
        TypeExpr fn = infer(t.kids[0]);
        std::size_t nargs = t.kids.size() - 1;
        if (fn.is_func()) {
            auto params = fn.args();
            if (params.size() != nargs)
                throw Error(Errc::ArityMismatch,
                            "expected " + std::to_string(params.size()) + " arguments, got " + std::to_string(nargs),
                            t.span);
            for (std::size_t i = 0; i < nargs; ++i) {
                TypeExpr a = infer(t.kids[i + 1]);
                if (a != params[i])
                    mismatch(t.kids[i + 1], "argument " + std::to_string(i + 1) + " has type " + render_type(a) +
                                                ", expected " + render_type(params[i]));
            }
            return fn.result();
        }
        if (fn.is_tuple()) {
            auto comps = fn.components();
            if (comps.size() != nargs)
                throw Error(Errc::ArityMismatch,
                            "tuple of " + std::to_string(comps.size()) + " components matched against " +
                                std::to_string(nargs) + " arguments",
                            t.span);
            for (std::size_t i = 0; i < nargs; ++i) {
                TypeExpr a = infer(t.kids[i + 1]);
                if (!compatible_types(a, comps[i], schema_))
                    mismatch(t.kids[i + 1], "component " + std::to_string(i + 1) + " has type " + render_type(a) +
                                                ", expected " + render_type(comps[i]));
            }
            return bool_type();
        }
        mismatch(t, "cannot apply a value of type " + render_type(fn));
    }
};

// ---------------------------------------------------------------------------
// Binder type inference

class BinderInference {
public:
    explicit BinderInference(const Schema& schema) : schema_(schema) {}

    Term run(Term t) {
        for (int pass = 0; pass < 64; ++pass) {
            changed_ = false;
            next_slot_ = 0;
            scope_.clear();
            synth(t);
            if (!changed_)
                break;
        }
        next_slot_ = 0;
        scope_.clear();
        finish(t);
        return t;
    }

private:
    const Schema& schema_;
    std::vector<std::optional<TypeExpr>> slots_;
    std::vector<std::pair<std::string, std::size_t>> scope_;
    std::size_t next_slot_ = 0;
    bool changed_ = false;

    void set_slot(std::size_t slot, const TypeExpr& type) {
        if (!slots_[slot]) {
            slots_[slot] = type;
            changed_ = true;
        }
    }

    std::optional<std::size_t> lookup(const std::string& name) const {
        for (auto it = scope_.rbegin(); it != scope_.rend(); ++it)
            if (it->first == name)
                return it->second;
        return std::nullopt;
    }

    std::size_t open(const std::vector<Binder>& binders) {
        std::size_t mark = scope_.size();
        for (const auto& b : binders) {
            std::size_t slot = next_slot_++;
            if (slot >= slots_.size())
                slots_.emplace_back();
            if (b.type)
                set_slot(slot, *b.type);
            scope_.emplace_back(b.name, slot);
        }
        return mark;
    }

    void expect(Term& t, const TypeExpr& type) {
        if (t.kind == TermKind::Var) {
            if (auto slot = lookup(t.name))
                set_slot(*slot, type);
        } else if (t.kind == TermKind::Const && !t.type && type.is_base()) {
            t.type = type;
            changed_ = true;
        }
    }

    std::optional<TypeExpr> synth(Term& t) {
        switch (t.kind) {
        case TermKind::Var: {
            auto slot = lookup(t.name);
            if (!slot)
                return t.type;
            if (t.type)
                set_slot(*slot, *t.type);
            return slots_[*slot];
        }
        case TermKind::Const: return t.type;
        case TermKind::AttrRef: return schema_.resolve_attribute(t.name).type;
        case TermKind::App: {
            auto fn = synth(t.kids[0]);
            std::size_t nargs = t.kids.size() - 1;
            for (std::size_t i = 0; i < nargs; ++i) {
                if (fn && fn->is_func() && fn->args().size() == nargs)
                    expect(t.kids[i + 1], fn->args()[i]);
                else if (fn && fn->is_tuple() && fn->components().size() == nargs)
                    expect(t.kids[i + 1], fn->components()[i]);
                synth(t.kids[i + 1]);
            }
            if (!fn)
                return std::nullopt;
            if (fn->is_func())
                return fn->result();
            if (fn->is_tuple())
                return bool_type();
            return std::nullopt;
        }
        case TermKind::Lambda: {
            std::size_t first = next_slot_;
            std::size_t mark = open(t.binders);
            auto body = synth(t.kids[0]);
            scope_.resize(mark);
            std::vector<TypeExpr> params;
            for (std::size_t i = 0; i < t.binders.size(); ++i) {
                if (!slots_[first + i])
                    return std::nullopt;
                params.push_back(*slots_[first + i]);
            }
            if (!body)
                return std::nullopt;
            return TypeExpr::func(*body, std::move(params));
        }
        case TermKind::Exists:
        case TermKind::Forall: {
            std::size_t mark = open(t.binders);
            synth(t.kids[0]);
            scope_.resize(mark);
            return bool_type();
        }
        case TermKind::TupleCons: {
            std::vector<TypeExpr> comps;
            bool all = true;
            for (auto& k : t.kids) {
                auto c = synth(k);
                if (c)
                    comps.push_back(*c);
                else
                    all = false;
            }
            if (!all)
                return std::nullopt;
            return TypeExpr::tuple(std::move(comps));
        }
        case TermKind::Component: {
            auto tt = synth(t.kids[0]);
            if (tt && tt->is_tuple() && t.index >= 1 && static_cast<std::size_t>(t.index) <= tt->components().size())
                return tt->components()[t.index - 1];
            return std::nullopt;
        }
        case TermKind::Not:
        case TermKind::And:
        case TermKind::Or:
        case TermKind::Implies:
            for (auto& k : t.kids) {
                expect(k, bool_type());
                synth(k);
            }
            return bool_type();
        case TermKind::Count: {
            auto& set = t.kids[0];
            if (set.kind == TermKind::Lambda && set.binders.size() == 1 && !set.binders[0].type)
                set.binders[0].type = TypeExpr::base(t.name), changed_ = true;
            synth(set);
            return TypeExpr::base(std::string(kNumberBase));
        }
        case TermKind::Compare:
        case TermKind::Arith: {
            auto l = synth(t.kids[0]);
            auto r = synth(t.kids[1]);
            if (l)
                expect(t.kids[1], *l);
            if (r)
                expect(t.kids[0], *r);
            if (t.kind == TermKind::Compare)
                return bool_type();
            return l ? l : r;
        }
        }
        return std::nullopt;
    }

    void finish(Term& t) {
        if (t.kind == TermKind::Var) {
            if (auto slot = lookup(t.name); slot && slots_[*slot])
                t.type = slots_[*slot];
            return;
        }
        if (t.kind == TermKind::Const) {
            if (!t.type)
                t.type = literal_base(t.value);
            return;
        }
        if (t.is_binder()) {
            std::size_t mark = scope_.size();
            for (auto& b : t.binders) {
                std::size_t slot = next_slot_++;
                if (!slots_[slot])
                    throw Error(Errc::AmbiguousVariable,
                                "cannot infer the type of '" + b.name + "'; write " + b.name + "^Type", t.span);
                b.type = slots_[slot];
                scope_.emplace_back(b.name, slot);
            }
            finish(t.kids[0]);
            scope_.resize(mark);
            return;
        }
        for (auto& k : t.kids)
            finish(k);
    }
};

} // namespace

TypeExpr infer_type(const Term& t, TypeEnv& env, const Schema& schema) { return Checker(env, schema).infer(t); }

QuerySignature check_query(const Term& t, const Schema& schema) {
    check_well_formed(t);
    if (auto fv = free_vars(t); !fv.empty())
        throw Error(Errc::NotClosed, "free variable '" + *fv.begin() + "'", t.span);
    if (t.kind != TermKind::Lambda)
        throw Error(Errc::NotLambda, "a query must be a lambda abstraction", t.span);
    TypeEnv env;
    TypeExpr type = infer_type(t, env, schema);
    if (!is_bool(type.result()))
        throw Error(Errc::BodyNotBool, "query body has type " + render_type(type.result()), t.span);
    QuerySignature sig;
    for (const auto& b : t.binders)
        sig.columns.emplace_back(b.name, *b.type);
    return sig;
}

Term infer_binder_types(Term t, const Schema& schema) { return BinderInference(schema).run(std::move(t)); }

} // namespace lambdaq
