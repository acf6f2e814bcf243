#include "lambdaq/types.hpp"

#include "lambdaq/error.hpp"

#include <algorithm>
#include <cctype>

namespace lambdaq {

std::string_view to_string(Carrier c) {
    switch (c) {
    case Carrier::String: return "String";
    case Carrier::Number: return "Number";
    case Carrier::Bool: return "Bool";
    case Carrier::Date: return "Date";
    }
    return "?";
}

std::optional<Carrier> carrier_from_string(std::string_view s) {
    if (s == "String") return Carrier::String;
    if (s == "Number") return Carrier::Number;
    if (s == "Bool") return Carrier::Bool;
    if (s == "Date") return Carrier::Date;
    return std::nullopt;
}

TypeExpr TypeExpr::base(std::string name) {
    TypeExpr t;
    t.kind_ = Kind::Base;
    t.name_ = std::move(name);
    return t;
}

TypeExpr TypeExpr::func(TypeExpr result, std::vector<TypeExpr> args) {
    if (args.empty())
        throw Error(Errc::Syntax, "functional type needs at least one argument");
    TypeExpr t;
    t.kind_ = Kind::Func;
    t.items_.reserve(args.size() + 1);
    t.items_.push_back(std::move(result));
    for (auto& a : args)
        t.items_.push_back(std::move(a));
    return t;
}

TypeExpr TypeExpr::tuple(std::vector<TypeExpr> components) {
    if (components.empty())
        throw Error(Errc::Syntax, "tuple type needs at least one component");
    TypeExpr t;
    t.kind_ = Kind::Tuple;
    t.items_ = std::move(components);
    return t;
}

bool type_equal(const TypeExpr& a, const TypeExpr& b) { return a == b; }

TypeExpr bool_func(std::vector<TypeExpr> args) {
    return TypeExpr::func(TypeExpr::base(std::string(kBoolBase)), std::move(args));
}

bool is_identifier(std::string_view s) {
    if (s.empty() || !(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_'))
        return false;
    return std::all_of(s.begin(), s.end(), [](char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
    });
}

namespace {

class TypeParser {
public:
    explicit TypeParser(std::string_view text) : text_(text) {}

    TypeExpr parse() {
        TypeExpr t = parse_type();
        skip_ws();
        if (pos_ != text_.size())
            fail("trailing characters");
        return t;
    }

private:
    std::string_view text_;
    std::size_t pos_ = 0;

    [[noreturn]] void fail(const std::string& what) const {
        throw Error(Errc::Syntax, "type notation: " + what + " in '" + std::string(text_) + "'",
                    SourceSpan{pos_, pos_});
    }

    void skip_ws() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_])))
            ++pos_;
    }

    bool eat(char c) {
        skip_ws();
        if (pos_ < text_.size() && text_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    void expect(char c) {
        if (!eat(c))
            fail(std::string("expected '") + c + "'");
    }

    TypeExpr parse_type() {
        skip_ws();
        if (eat('(')) {
            skip_ws();
            if (pos_ < text_.size() && (text_[pos_] == ':' || text_[pos_] == ')'))
                fail("empty argument/result");
            TypeExpr first = parse_type();
            if (eat(':')) {
                std::vector<TypeExpr> args = parse_list();
                expect(')');
                return TypeExpr::func(std::move(first), std::move(args));
            }
            std::vector<TypeExpr> comps{std::move(first)};
            while (eat(','))
                comps.push_back(parse_type());
            expect(')');
            return TypeExpr::tuple(std::move(comps));
        }
        std::size_t start = pos_;
        while (pos_ < text_.size() &&
               (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
            ++pos_;
        if (start == pos_)
            fail(pos_ == text_.size() ? "unexpected end" : "expected a type");
        auto name = text_.substr(start, pos_ - start);
        if (!is_identifier(name))
            fail("bad base name '" + std::string(name) + "'");
        return TypeExpr::base(std::string(name));
    }

    std::vector<TypeExpr> parse_list() {
        skip_ws();
        if (pos_ < text_.size() && text_[pos_] == ')')
            fail("empty argument/result");
        std::vector<TypeExpr> out{parse_type()};
        while (eat(','))
            out.push_back(parse_type());
        return out;
    }
};

void render_into(const TypeExpr& t, std::string& out) {
    switch (t.kind()) {
    case TypeExpr::Kind::Base: out += t.name(); return;
    case TypeExpr::Kind::Func: {
        out += '(';
        render_into(t.result(), out);
        out += ": ";
        bool first = true;
        for (const auto& a : t.args()) {
            if (!first) out += ", ";
            first = false;
            render_into(a, out);
        }
        out += ')';
        return;
    }
    case TypeExpr::Kind::Tuple: {
        out += '(';
        bool first = true;
        for (const auto& c : t.components()) {
            if (!first) out += ", ";
            first = false;
            render_into(c, out);
        }
        out += ')';
        return;
    }
    }
}

void collect_bases(const TypeExpr& t, std::vector<std::string>& out) {
    if (t.is_base()) {
        if (std::find(out.begin(), out.end(), t.name()) == out.end())
            out.push_back(t.name());
        return;
    }
    for (const auto& c : t.components())
        collect_bases(c, out);
}

} // namespace

TypeExpr parse_type(std::string_view text) { return TypeParser(text).parse(); }

std::string render_type(const TypeExpr& t) {
    std::string out;
    render_into(t, out);
    return out;
}

std::vector<std::string> base_names(const TypeExpr& t) {
    std::vector<std::string> out;
    collect_bases(t, out);
    return out;
}

} // namespace lambdaq
