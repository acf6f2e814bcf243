#include "lambdaq/parser.hpp"

#include "lambdaq/error.hpp"
#include "lambdaq/typecheck.hpp"

#include <algorithm>
#include <cctype>

namespace lambdaq {

namespace {

// ---------------------------------------------------------------------------
// Lexer

enum class Tok {
    End,
    Ident,
    CountOp,
    String,
    Number,
    Lambda,
    Exists,
    Forall,
    And,
    Or,
    Not,
    Implies,
    True,
    False,
    LParen,
    RParen,
    LBracket,
    RBracket,
    LBrace,
    RBrace,
    Comma,
    Caret,
    Dot,
    Bar,
    Eq,
    Lt,
    Le,
    Gt,
    Ge,
    Plus,
    Minus,
    Star,
};

struct Token {
    Tok kind = Tok::End;
    std::string text;
    SourceSpan span;
};

std::string_view describe(Tok t) {
    switch (t) {
    case Tok::End: return "end of input";
    case Tok::Ident: return "identifier";
    case Tok::CountOp: return "COUNT";
    case Tok::String: return "string";
    case Tok::Number: return "number";
    case Tok::LParen: return "'('";
    case Tok::RParen: return "')'";
    case Tok::RBracket: return "']'";
    case Tok::RBrace: return "'}'";
    case Tok::Bar: return "'|'";
    case Tok::Caret: return "'^'";
    case Tok::Lambda: return "'lambda'";
    default: return "token";
    }
}

class Lexer {
public:
    explicit Lexer(std::string_view text) : s_(text) {}

    std::vector<Token> run() {
        std::vector<Token> out;
        while (true) {
            skip_ws();
            if (pos_ >= s_.size()) {
                out.push_back(Token{Tok::End, "", {s_.size(), s_.size()}});
                return out;
            }
            out.push_back(next());
        }
    }

private:
    std::string_view s_;
    std::size_t pos_ = 0;

    void skip_ws() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_])))
            ++pos_;
    }

    bool match(std::string_view lit) {
        if (s_.substr(pos_, lit.size()) == lit) {
            pos_ += lit.size();
            return true;
        }
        return false;
    }

    Token make(Tok kind, std::size_t start, std::string text = {}) {
        return Token{kind, std::move(text), {start, pos_}};
    }

    Token next() {
        std::size_t start = pos_;
        // Multi-byte symbols first.
        if (match("\xCE\xBB")) return make(Tok::Lambda, start);
        if (match("\xE2\x88\x83")) return make(Tok::Exists, start);
        if (match("\xE2\x88\x80")) return make(Tok::Forall, start);
        if (match("\xE2\x88\xA7")) return make(Tok::And, start);
        if (match("\xE2\x88\xA8")) return make(Tok::Or, start);
        if (match("\xC2\xAC")) return make(Tok::Not, start);
        if (match("\xE2\x86\x92") || match("\xE2\x87\x92") || match("=>")) return make(Tok::Implies, start);
        if (match("\xE2\x89\xA4") || match("<=")) return make(Tok::Le, start);
        if (match("\xE2\x89\xA5") || match(">=")) return make(Tok::Ge, start);

        char c = s_[pos_];
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_'))
                ++pos_;
            std::string word(s_.substr(start, pos_ - start));
            if (word == "lambda") return make(Tok::Lambda, start);
            if (word == "exists") return make(Tok::Exists, start);
            if (word == "forall" || word == "foreach") return make(Tok::Forall, start, word);
            if (word == "and") return make(Tok::And, start);
            if (word == "or") return make(Tok::Or, start);
            if (word == "not") return make(Tok::Not, start);
            if (word == "implies") return make(Tok::Implies, start);
            if (word == "TRUE" || word == "true") return make(Tok::True, start);
            if (word == "FALSE" || word == "false") return make(Tok::False, start);
            if (word.rfind("COUNT_", 0) == 0 && word.size() > 6) return make(Tok::CountOp, start, word.substr(6));
            return make(Tok::Ident, start, std::move(word));
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_])))
                ++pos_;
            if (pos_ + 1 < s_.size() && s_[pos_] == '.' && std::isdigit(static_cast<unsigned char>(s_[pos_ + 1]))) {
                ++pos_;
                while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_])))
                    ++pos_;
            }
            return make(Tok::Number, start, std::string(s_.substr(start, pos_ - start)));
        }
        if (c == '\'') {
            ++pos_;
            std::string text;
            while (true) {
                if (pos_ >= s_.size())
                    throw Error(Errc::Syntax, "unterminated string literal", SourceSpan{start, pos_});
                if (s_[pos_] == '\'') {
                    if (pos_ + 1 < s_.size() && s_[pos_ + 1] == '\'') {
                        text += '\'';
                        pos_ += 2;
                        continue;
                    }
                    ++pos_;
                    break;
                }
                text += s_[pos_++];
            }
            return make(Tok::String, start, std::move(text));
        }
        ++pos_;
        switch (c) {
        case '(': return make(Tok::LParen, start);
        case ')': return make(Tok::RParen, start);
        case '[': return make(Tok::LBracket, start);
        case ']': return make(Tok::RBracket, start);
        case '{': return make(Tok::LBrace, start);
        case '}': return make(Tok::RBrace, start);
        case ',': return make(Tok::Comma, start);
        case '^': return make(Tok::Caret, start);
        case '.': return make(Tok::Dot, start);
        case '|': return make(Tok::Bar, start);
        case '=': return make(Tok::Eq, start);
        case '<': return make(Tok::Lt, start);
        case '>': return make(Tok::Gt, start);
        case '+': return make(Tok::Plus, start);
        case '-': return make(Tok::Minus, start);
        case '*': return make(Tok::Star, start);
        default: break;
        }
        throw Error(Errc::Syntax, std::string("unexpected character '") + c + "'", SourceSpan{start, pos_});
    }
};

// ---------------------------------------------------------------------------
// Parser

SourceSpan join(SourceSpan a, SourceSpan b) { return {std::min(a.start, b.start), std::max(a.end, b.end)}; }

class Parser {
public:
    Parser(std::string_view text, const Schema& schema, bool friendly)
        : toks_(Lexer(text).run()), schema_(schema), friendly_(friendly) {}

    Term parse_query() {
        Term t = (friendly_ && peek().kind == Tok::LBrace) ? parse_set_builder() : parse_lambda_required();
        if (peek().kind != Tok::End)
            fail("unexpected " + std::string(describe(peek().kind)) + " after the query");
        return t;
    }

private:
    std::vector<Token> toks_;
    std::size_t pos_ = 0;
    const Schema& schema_;
    bool friendly_;
    std::vector<Binder> scope_;
    // Pending `.v^T` selections of the comparison being parsed.
    std::vector<std::vector<Term>> dot_frames_;

    const Token& peek(std::size_t ahead = 0) const {
        return toks_[std::min(pos_ + ahead, toks_.size() - 1)];
    }
    const Token& advance() { return toks_[std::min(pos_++, toks_.size() - 1)]; }
    bool accept(Tok k) {
        if (peek().kind == k) {
            ++pos_;
            return true;
        }
        return false;
    }

    [[noreturn]] void fail(const std::string& what) const { throw Error(Errc::Syntax, what, peek().span); }

    const Token& expect(Tok k) {
        if (peek().kind != k)
            fail("expected " + std::string(describe(k)) + ", found " + std::string(describe(peek().kind)));
        return advance();
    }

    TypeExpr type_tag() {
        const Token& t = expect(Tok::Ident);
        if (!schema_.find_base(t.text))
            throw Error(Errc::UnknownBase, "unknown base type '" + t.text + "'", t.span);
        return TypeExpr::base(t.text);
    }

    const Binder* lookup(const std::string& name) const {
        for (auto it = scope_.rbegin(); it != scope_.rend(); ++it)
            if (it->name == name)
                return &*it;
        return nullptr;
    }

    Binder parse_binder() {
        Binder b;
        b.name = expect(Tok::Ident).text;
        if (accept(Tok::Caret))
            b.type = type_tag();
        return b;
    }

    bool juxtaposed_binder_follows() const {
        if (peek().kind != Tok::Ident || peek(1).kind != Tok::Caret || peek(2).kind != Tok::Ident)
            return false;
        switch (peek(3).kind) {
        case Tok::LParen:
        case Tok::LBracket:
        case Tok::Dot:
        case Tok::Eq:
        case Tok::Lt:
        case Tok::Le:
        case Tok::Gt:
        case Tok::Ge:
        case Tok::Plus:
        case Tok::Minus:
        case Tok::Star: return false;
        default: return true;
        }
    }

    std::vector<Binder> parse_binders() {
        std::vector<Binder> out{parse_binder()};
        while (true) {
            if (accept(Tok::Comma))
                out.push_back(parse_binder());
            else if (juxtaposed_binder_follows())
                out.push_back(parse_binder());
            else
                return out;
        }
    }

    template <class Fn>
    Term scoped(const std::vector<Binder>& binders, Fn&& fn) {
        std::size_t mark = scope_.size();
        scope_.insert(scope_.end(), binders.begin(), binders.end());
        Term body = fn();
        scope_.resize(mark);
        return body;
    }

    Term parse_lambda_required() {
        if (peek().kind != Tok::Lambda)
            fail("a query starts with 'lambda'" + std::string(friendly_ ? " or '{'" : ""));
        return parse_lambda();
    }

    Term parse_lambda() {
        SourceSpan start = expect(Tok::Lambda).span;
        auto binders = parse_binders();
        expect(Tok::LParen);
        Term body = scoped(binders, [&] { return parse_formula(); });
        SourceSpan end = expect(Tok::RParen).span;
        Term t = Term::lambda(std::move(binders), std::move(body));
        t.span = join(start, end);
        return t;
    }

    Term parse_set_builder() {
        SourceSpan start = expect(Tok::LBrace).span;
        auto binders = parse_binders();
        expect(Tok::Bar);
        Term body = scoped(binders, [&] { return parse_formula(); });
        SourceSpan end = expect(Tok::RBrace).span;
        Term t = Term::lambda(std::move(binders), std::move(body));
        t.span = join(start, end);
        return t;
    }

    Term parse_formula() {
        Term lhs = parse_or();
        if (accept(Tok::Implies)) {
            Term rhs = parse_formula();
            SourceSpan sp = join(*lhs.span, *rhs.span);
            Term t = Term::implies(std::move(lhs), std::move(rhs));
            t.span = sp;
            return t;
        }
        return lhs;
    }

    Term parse_or() {
        Term lhs = parse_and();
        while (accept(Tok::Or)) {
            Term rhs = parse_and();
            SourceSpan sp = join(*lhs.span, *rhs.span);
            lhs = Term::disj(std::move(lhs), std::move(rhs));
            lhs.span = sp;
        }
        return lhs;
    }

    Term parse_and() {
        Term lhs = parse_unary();
        while (accept(Tok::And)) {
            Term rhs = parse_unary();
            SourceSpan sp = join(*lhs.span, *rhs.span);
            lhs = Term::conj(std::move(lhs), std::move(rhs));
            lhs.span = sp;
        }
        return lhs;
    }

    Term parse_unary() {
        SourceSpan start = peek().span;
        if (accept(Tok::Not)) {
            Term inner = parse_unary();
            SourceSpan sp = join(start, *inner.span);
            Term t = Term::negate(std::move(inner));
            t.span = sp;
            return t;
        }
        if (peek().kind == Tok::Exists || peek().kind == Tok::Forall) {
            bool exists = advance().kind == Tok::Exists;
            auto binders = parse_binders();
            Term body = scoped(binders, [&] { return parse_and(); });
            SourceSpan sp = join(start, *body.span);
            Term t = exists ? Term::exists(std::move(binders), std::move(body))
                            : Term::forall(std::move(binders), std::move(body));
            t.span = sp;
            return t;
        }
        return parse_comparison();
    }

    Term parse_comparison() {
        dot_frames_.emplace_back();
        Term lhs = parse_additive();
        std::optional<CmpOp> op;
        switch (peek().kind) {
        case Tok::Eq: op = CmpOp::Eq; break;
        case Tok::Lt: op = CmpOp::Lt; break;
        case Tok::Le: op = CmpOp::Le; break;
        case Tok::Gt: op = CmpOp::Gt; break;
        case Tok::Ge: op = CmpOp::Ge; break;
        default: break;
        }
        Term result = std::move(lhs);
        if (op) {
            advance();
            Term rhs = parse_additive();
            SourceSpan sp = join(*result.span, *rhs.span);
            result = Term::compare(*op, std::move(result), std::move(rhs));
            result.span = sp;
        }
        auto bindings = std::move(dot_frames_.back());
        dot_frames_.pop_back();
        if (bindings.empty())
            return result;
        SourceSpan sp = *result.span;
        bindings.push_back(std::move(result));
        Term out = make_conjunction(std::move(bindings));
        out.span = sp;
        return out;
    }

    Term parse_additive() {
        Term lhs = parse_multiplicative();
        while (peek().kind == Tok::Plus || peek().kind == Tok::Minus) {
            ArithOp op = advance().kind == Tok::Plus ? ArithOp::Add : ArithOp::Sub;
            Term rhs = parse_multiplicative();
            SourceSpan sp = join(*lhs.span, *rhs.span);
            lhs = Term::arith_op(op, std::move(lhs), std::move(rhs));
            lhs.span = sp;
        }
        return lhs;
    }

    Term parse_multiplicative() {
        Term lhs = parse_postfix();
        while (accept(Tok::Star)) {
            Term rhs = parse_postfix();
            SourceSpan sp = join(*lhs.span, *rhs.span);
            lhs = Term::arith_op(ArithOp::Mul, std::move(lhs), std::move(rhs));
            lhs.span = sp;
        }
        return lhs;
    }

    Term parse_postfix() {
        Term t = parse_primary();
        while (true) {
            if (accept(Tok::LParen)) {
                std::vector<Term> args;
                if (peek().kind == Tok::RParen)
                    fail("application needs at least one argument");
                args.push_back(parse_formula());
                while (accept(Tok::Comma))
                    args.push_back(parse_formula());
                SourceSpan end = expect(Tok::RParen).span;
                SourceSpan sp = join(*t.span, end);
                t = Term::app(std::move(t), std::move(args));
                t.span = sp;
            } else if (accept(Tok::LBracket)) {
                const Token& num = expect(Tok::Number);
                auto n = Number::parse(num.text);
                if (!n || !n->is_integer())
                    throw Error(Errc::Syntax, "component index must be an integer", num.span);
                SourceSpan end = expect(Tok::RBracket).span;
                SourceSpan sp = join(*t.span, end);
                t = Term::component(std::move(t), static_cast<int>(n->as_int()));
                t.span = sp;
            } else if (accept(Tok::Dot)) {
                t = parse_dot(std::move(t));
            } else {
                return t;
            }
        }
    }

    /// Static type of an attribute application chain, for dot selection.
    std::optional<TypeExpr> static_type(const Term& t) const {
        switch (t.kind) {
        case TermKind::AttrRef: return schema_.resolve_attribute(t.name).type;
        case TermKind::Var: {
            if (t.type)
                return t.type;
            const Binder* b = lookup(t.name);
            return b ? b->type : std::nullopt;
        }
        case TermKind::App: {
            auto fn = static_type(t.kids[0]);
            if (fn && fn->is_func())
                return fn->result();
            return std::nullopt;
        }
        case TermKind::Component: {
            auto tt = static_type(t.kids[0]);
            if (tt && tt->is_tuple() && t.index >= 1 && static_cast<std::size_t>(t.index) <= tt->components().size())
                return tt->components()[t.index - 1];
            return std::nullopt;
        }
        default: return std::nullopt;
        }
    }

    Term parse_dot(Term tuple) {
        const Token& name = expect(Tok::Ident);
        std::optional<Binder> label;
        std::string base = name.text;
        SourceSpan sp = join(*tuple.span, name.span);
        if (accept(Tok::Caret)) {
            const Token& tag = expect(Tok::Ident);
            sp = join(sp, tag.span);
            const Binder* b = lookup(name.text);
            if (!b)
                throw Error(Errc::UnknownVariable, "unbound variable '" + name.text + "'", name.span);
            label = Binder{name.text, TypeExpr::base(tag.text)};
            base = tag.text;
        }
        auto tt = static_type(tuple);
        if (!tt || !tt->is_tuple())
            throw Error(Errc::TypeMismatch, "'." + base + "' needs a tuple-valued attribute application", sp);
        int index = 0;
        auto comps = tt->components();
        for (std::size_t i = 0; i < comps.size(); ++i) {
            if (comps[i].is_base() && comps[i].name() == base) {
                if (index)
                    throw Error(Errc::TypeMismatch, "'." + base + "' is ambiguous in " + render_type(*tt), sp);
                index = static_cast<int>(i + 1);
            }
        }
        if (!index)
            throw Error(Errc::TypeMismatch, "no component of type " + base + " in " + render_type(*tt), sp);
        Term comp = Term::component(std::move(tuple), index);
        comp.span = sp;
        if (!label)
            return comp;
        Term var = Term::var(label->name, label->type);
        var.span = sp;
        Term binding = Term::compare(CmpOp::Eq, std::move(comp), var);
        binding.span = sp;
        dot_frames_.back().push_back(std::move(binding));
        return var;
    }

    Term parse_primary() {
        const Token& tok = peek();
        SourceSpan start = tok.span;
        switch (tok.kind) {
        case Tok::Ident: {
            std::string name = advance().text;
            if (name == "date" && peek().kind == Tok::String) {
                const Token& lit = advance();
                auto d = Date::parse(lit.text);
                if (!d)
                    throw Error(Errc::Syntax, "bad date literal '" + lit.text + "'", lit.span);
                return tagged_constant(*d, join(start, lit.span));
            }
            std::optional<TypeExpr> tag;
            SourceSpan sp = start;
            if (accept(Tok::Caret)) {
                sp = join(sp, peek().span);
                tag = type_tag();
            }
            if (lookup(name)) {
                Term v = Term::var(name, tag);
                v.span = sp;
                return v;
            }
            if (tag)
                throw Error(Errc::UnknownVariable, "unbound variable '" + name + "'", sp);
            NameRef ref;
            try {
                ref = schema_.resolve_name(name);
            } catch (const Error&) {
                throw Error(Errc::UnknownAttribute, "'" + name + "' is neither a bound variable nor an attribute", sp);
            }
            if (!ref.attribute)
                throw Error(Errc::UnknownAttribute, "'" + name + "' is a type, not an attribute", sp);
            Term a = Term::attr(ref.attribute->name);
            a.span = sp;
            return a;
        }
        case Tok::CountOp: {
            std::string base = advance().text;
            if (!schema_.find_base(base))
                throw Error(Errc::UnknownBase, "unknown base type '" + base + "'", start);
            expect(Tok::LParen);
            Term set = parse_formula();
            SourceSpan end = expect(Tok::RParen).span;
            Term t = Term::count(std::move(base), std::move(set));
            t.span = join(start, end);
            return t;
        }
        case Tok::String: {
            std::string text = advance().text;
            return tagged_constant(Value(std::move(text)), start);
        }
        case Tok::Number: {
            auto n = Number::parse(advance().text);
            return tagged_constant(*n, start);
        }
        case Tok::Minus: {
            advance();
            const Token& num = expect(Tok::Number);
            auto n = Number::parse(num.text);
            return tagged_constant(Number(0) - *n, join(start, num.span));
        }
        case Tok::True:
        case Tok::False: {
            bool v = advance().kind == Tok::True;
            return tagged_constant(v, start);
        }
        case Tok::LParen: {
            advance();
            Term first = parse_formula();
            if (accept(Tok::Comma)) {
                std::vector<Term> comps{std::move(first)};
                while (peek().kind != Tok::RParen) {
                    comps.push_back(parse_formula());
                    if (!accept(Tok::Comma))
                        break;
                }
                SourceSpan end = expect(Tok::RParen).span;
                Term t = Term::tuple(std::move(comps));
                t.span = join(start, end);
                return t;
            }
            SourceSpan end = expect(Tok::RParen).span;
            first.span = join(start, end);
            return first;
        }
        case Tok::Lambda: return parse_lambda();
        case Tok::LBrace:
            if (friendly_)
                return parse_set_builder();
            break;
        default: break;
        }
        fail("unexpected " + std::string(describe(tok.kind)));
    }

    Term tagged_constant(Value v, SourceSpan sp) {
        std::optional<TypeExpr> tag;
        if (accept(Tok::Caret)) {
            sp = join(sp, peek().span);
            tag = type_tag();
        }
        Term c = Term::constant(std::move(v), std::move(tag));
        c.span = sp;
        return c;
    }
};

// ---------------------------------------------------------------------------
// Typed elision (friendly syntax)

class Elider {
public:
    Elider(const Schema& schema, std::set<std::string> used) : schema_(schema), used_(std::move(used)) {}

    Term run(const Term& t) { return walk(t); }

private:
    const Schema& schema_;
    std::set<std::string> used_;
    std::vector<Binder> scope_;

    std::optional<TypeExpr> type_of(const Term& t) const {
        switch (t.kind) {
        case TermKind::Var: {
            if (t.type)
                return t.type;
            for (auto it = scope_.rbegin(); it != scope_.rend(); ++it)
                if (it->name == t.name)
                    return it->type;
            return std::nullopt;
        }
        case TermKind::Const: return t.type;
        case TermKind::AttrRef: return schema_.resolve_attribute(t.name).type;
        case TermKind::App: {
            auto fn = type_of(t.kids[0]);
            if (fn && fn->is_func())
                return fn->result();
            return std::nullopt;
        }
        case TermKind::Component: {
            auto tt = type_of(t.kids[0]);
            if (tt && tt->is_tuple() && t.index >= 1 && static_cast<std::size_t>(t.index) <= tt->components().size())
                return tt->components()[t.index - 1];
            return std::nullopt;
        }
        default: return std::nullopt;
        }
    }

    Term walk(const Term& t) {
        Term out = t;
        if (t.is_binder()) {
            std::size_t mark = scope_.size();
            scope_.insert(scope_.end(), t.binders.begin(), t.binders.end());
            out.kids[0] = walk(t.kids[0]);
            scope_.resize(mark);
            return out;
        }
        for (auto& k : out.kids)
            k = walk(k);
        if (out.kind == TermKind::App)
            return elide(std::move(out));
        return out;
    }

    Term elide(Term app) {
        auto fn = type_of(app.kids[0]);
        if (!fn)
            return app;
        std::vector<TypeExpr> params;
        bool tuple_match = false;
        if (fn->is_func() && fn->result().is_base() && fn->result().name() == kBoolBase)
            params.assign(fn->args().begin(), fn->args().end());
        else if (fn->is_tuple()) {
            params.assign(fn->components().begin(), fn->components().end());
            tuple_match = true;
        } else
            return app;
        std::size_t nargs = app.kids.size() - 1;
        if (nargs >= params.size())
            return app;

        std::vector<std::optional<Term>> placed(params.size());
        for (std::size_t i = 0; i < nargs; ++i) {
            Term& arg = app.kids[i + 1];
            auto at = type_of(arg);
            if (!at)
                throw Error(Errc::ElisionAmbiguity,
                            "argument " + std::to_string(i + 1) + " needs a type tag to be placed", arg.span);
            std::vector<std::size_t> candidates;
            for (std::size_t p = 0; p < params.size(); ++p) {
                if (placed[p])
                    continue;
                bool fits = tuple_match && at->is_base() && params[p].is_base()
                                ? schema_.compatible(at->name(), params[p].name())
                                : *at == params[p];
                if (fits)
                    candidates.push_back(p);
            }
            if (candidates.size() != 1)
                throw Error(Errc::ElisionAmbiguity,
                            "cannot place argument of type " + render_type(*at) + " among " + render_type(*fn) +
                                (candidates.empty() ? ": no free position" : ": several positions fit"),
                            arg.span);
            placed[candidates.front()] = std::move(arg);
        }
        std::vector<Binder> fresh;
        std::vector<Term> args;
        for (std::size_t p = 0; p < params.size(); ++p) {
            if (placed[p]) {
                args.push_back(std::move(*placed[p]));
                continue;
            }
            std::string hint = params[p].is_base() ? params[p].name() : "v";
            std::transform(hint.begin(), hint.end(), hint.begin(),
                           [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
            std::string name = fresh_name(hint, used_);
            fresh.push_back(Binder{name, params[p]});
            args.push_back(Term::var(name, params[p]));
        }
        auto span = app.span;
        Term full = Term::app(std::move(app.kids[0]), std::move(args));
        full.span = span;
        Term wrapped = Term::exists(std::move(fresh), std::move(full));
        wrapped.span = span;
        return wrapped;
    }
};

Term finish(Term t, const Schema& schema) {
    check_well_formed(t);
    return infer_binder_types(std::move(t), schema);
}

} // namespace

Term parse_term_raw(std::string_view text, const Schema& schema) {
    return finish(Parser(text, schema, false).parse_query(), schema);
}

Term parse_term_friendly(std::string_view text, const Schema& schema) {
    Term t = Parser(text, schema, true).parse_query();
    check_well_formed(t);
    t = Elider(schema, all_var_names(t)).run(t);
    return finish(std::move(t), schema);
}

Term parse_query(std::string_view text, const Schema& schema, Syntax syntax) {
    return syntax == Syntax::Raw ? parse_term_raw(text, schema) : parse_term_friendly(text, schema);
}

// ---------------------------------------------------------------------------
// Rendering

namespace {

enum Prec { kImplies = 1, kOr, kAnd, kUnary, kCompare, kAdd, kMul, kPostfix };

int prec_of(const Term& t) {
    switch (t.kind) {
    case TermKind::Implies: return kImplies;
    case TermKind::Or: return kOr;
    case TermKind::And: return kAnd;
    case TermKind::Not:
    case TermKind::Exists:
    case TermKind::Forall: return kUnary;
    case TermKind::Compare: return kCompare;
    case TermKind::Arith: return t.arith == ArithOp::Mul ? kMul : kAdd;
    default: return kPostfix;
    }
}

std::string render_binders(const std::vector<Binder>& bs) {
    std::string out;
    for (std::size_t i = 0; i < bs.size(); ++i) {
        if (i) out += ", ";
        out += bs[i].name;
        if (bs[i].type)
            out += "^" + render_type(*bs[i].type);
    }
    return out;
}

std::string render(const Term& t, int ctx);

std::string render_list(const std::vector<Term>& kids, std::size_t from) {
    std::string out;
    for (std::size_t i = from; i < kids.size(); ++i) {
        if (i > from) out += ", ";
        out += render(kids[i], 0);
    }
    return out;
}

/// True when the rendering of t, placed at precedence ctx, ends inside a
/// quantifier scope that would swallow a following operator.
bool ends_open(const Term& t, int ctx) {
    if (prec_of(t) < ctx)
        return false;
    switch (t.kind) {
    case TermKind::Exists:
    case TermKind::Forall: return true;
    case TermKind::Not: return ends_open(t.kids[0], kUnary);
    case TermKind::And: return ends_open(t.kids[1], kAnd + 1);
    case TermKind::Or: return ends_open(t.kids[1], kOr + 1);
    case TermKind::Implies: return ends_open(t.kids[1], kImplies);
    default: return false;
    }
}

std::string left_operand(const Term& l, int ctx) {
    return ends_open(l, ctx) ? "(" + render(l, 0) + ")" : render(l, ctx);
}

std::string render_raw(const Term& t) {
    switch (t.kind) {
    case TermKind::Var: return t.name;
    case TermKind::Const: {
        std::string lit = to_literal(t.value);
        if (t.type && *t.type != literal_base(t.value))
            lit += "^" + render_type(*t.type);
        return lit;
    }
    case TermKind::AttrRef: return t.name;
    case TermKind::App: return render(t.kids[0], kPostfix) + "(" + render_list(t.kids, 1) + ")";
    case TermKind::Component: return render(t.kids[0], kPostfix) + "[" + std::to_string(t.index) + "]";
    case TermKind::Lambda: return "lambda " + render_binders(t.binders) + " (" + render(t.body(), 0) + ")";
    case TermKind::TupleCons:
        return "(" + render_list(t.kids, 0) + (t.kids.size() == 1 ? ",)" : ")");
    case TermKind::Not: return "not " + render(t.kids[0], kUnary);
    case TermKind::And: return left_operand(t.kids[0], kAnd) + " and " + render(t.kids[1], kAnd + 1);
    case TermKind::Or: return left_operand(t.kids[0], kOr) + " or " + render(t.kids[1], kOr + 1);
    case TermKind::Implies:
        return left_operand(t.kids[0], kImplies + 1) + " implies " + render(t.kids[1], kImplies);
    case TermKind::Exists:
    case TermKind::Forall:
        return std::string(t.kind == TermKind::Exists ? "exists " : "forall ") + render_binders(t.binders) + " (" +
               render(t.body(), 0) + ")";
    case TermKind::Count: return "COUNT_" + t.name + "(" + render(t.kids[0], 0) + ")";
    case TermKind::Compare:
        return render(t.kids[0], kAdd) + " " + std::string(to_string(t.cmp)) + " " + render(t.kids[1], kAdd);
    case TermKind::Arith: {
        int p = prec_of(t);
        return render(t.kids[0], p) + " " + std::string(to_string(t.arith)) + " " + render(t.kids[1], p + 1);
    }
    }
    return "?";
}

std::string render(const Term& t, int ctx) {
    std::string s = render_raw(t);
    if (prec_of(t) < ctx)
        return "(" + s + ")";
    return s;
}

} // namespace

std::string render_term(const Term& t) { return render(t, 0); }

} // namespace lambdaq
