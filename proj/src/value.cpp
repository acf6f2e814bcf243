#include "lambdaq/value.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>

namespace lambdaq {

Number Number::from_double(double d) {
    Number n;
    if (std::isfinite(d) && d == std::trunc(d) && std::fabs(d) < 9.0e18) {
        n.int_ = static_cast<std::int64_t>(d);
        return n;
    }
    n.is_int_ = false;
    n.dbl_ = d;
    return n;
}

std::partial_ordering operator<=>(const Number& a, const Number& b) {
    if (a.is_int_ && b.is_int_)
        return a.int_ <=> b.int_;
    return a.as_double() <=> b.as_double();
}

namespace {
template <class IntOp, class DblOp>
Number combine(const Number& a, const Number& b, IntOp int_op, DblOp dbl_op) {
    if (a.is_integer() && b.is_integer()) {
        std::int64_t out = 0;
        if (!int_op(a.as_int(), b.as_int(), &out))
            return Number(out);
    }
    return Number::from_double(dbl_op(a.as_double(), b.as_double()));
}
} // namespace

Number operator+(const Number& a, const Number& b) {
    return combine(
        a, b, [](auto x, auto y, auto* r) { return __builtin_add_overflow(x, y, r); },
        [](double x, double y) { return x + y; });
}

Number operator-(const Number& a, const Number& b) {
    return combine(
        a, b, [](auto x, auto y, auto* r) { return __builtin_sub_overflow(x, y, r); },
        [](double x, double y) { return x - y; });
}

Number operator*(const Number& a, const Number& b) {
    return combine(
        a, b, [](auto x, auto y, auto* r) { return __builtin_mul_overflow(x, y, r); },
        [](double x, double y) { return x * y; });
}

std::string Number::to_string() const {
    if (is_int_)
        return std::to_string(int_);
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, dbl_);
    return std::string(buf, end);
}

std::optional<Number> Number::parse(std::string_view text) {
    if (text.empty())
        return std::nullopt;
    const char* first = text.data();
    const char* last = text.data() + text.size();
    if (text.find_first_of(".eE") == std::string_view::npos) {
        std::int64_t v = 0;
        auto [p, ec] = std::from_chars(first, last, v);
        if (ec == std::errc() && p == last)
            return Number(v);
        return std::nullopt;
    }
    double d = 0;
    auto [p, ec] = std::from_chars(first, last, d);
    if (ec == std::errc() && p == last)
        return from_double(d);
    return std::nullopt;
}

std::optional<Date> Date::parse(std::string_view text) {
    if (text.size() != 10 || text[4] != '-' || text[7] != '-')
        return std::nullopt;
    auto num = [&](std::size_t pos, std::size_t len) -> int {
        int v = 0;
        auto [p, ec] = std::from_chars(text.data() + pos, text.data() + pos + len, v);
        if (ec != std::errc() || p != text.data() + pos + len)
            return -1;
        return v;
    };
    int y = num(0, 4), m = num(5, 2), d = num(8, 2);
    if (y < 0 || m < 1 || m > 12 || d < 1)
        return std::nullopt;
    static constexpr int kDays[] = {31, 29, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    bool leap = (y % 4 == 0 && y % 100 != 0) || y % 400 == 0;
    int limit = kDays[m - 1] - (m == 2 && !leap ? 1 : 0);
    if (d > limit)
        return std::nullopt;
    Date out;
    out.iso_ = std::string(text);
    return out;
}

Value Value::set(std::vector<Value> items) {
    std::sort(items.begin(), items.end());
    items.erase(std::unique(items.begin(), items.end()), items.end());
    return SetVal{std::move(items)};
}

bool Value::set_contains(const Value& v) const {
    const auto& items = set_items();
    return std::binary_search(items.begin(), items.end(), v);
}

bool Value::contains_undef() const {
    if (is_undef())
        return true;
    if (is_tuple())
        return std::any_of(tuple_items().begin(), tuple_items().end(),
                           [](const Value& x) { return x.contains_undef(); });
    if (is_set())
        return std::any_of(set_items().begin(), set_items().end(),
                           [](const Value& x) { return x.contains_undef(); });
    return false;
}

namespace {
std::strong_ordering compare_lists(const std::vector<Value>& a, const std::vector<Value>& b) {
    std::size_t n = std::min(a.size(), b.size());
    for (std::size_t i = 0; i < n; ++i)
        if (auto c = compare(a[i], b[i]); c != 0)
            return c;
    return a.size() <=> b.size();
}
} // namespace

std::strong_ordering compare(const Value& a, const Value& b) {
    if (a.v_.index() != b.v_.index())
        return a.v_.index() <=> b.v_.index();
    return std::visit(
        [&](const auto& x) -> std::strong_ordering {
            using T = std::decay_t<decltype(x)>;
            const auto& y = std::get<T>(b.v_);
            if constexpr (std::is_same_v<T, TupleVal> || std::is_same_v<T, SetVal>) {
                return compare_lists(x.items, y.items);
            } else if constexpr (std::is_same_v<T, Number>) {
                auto c = x <=> y;
                if (c == std::partial_ordering::less) return std::strong_ordering::less;
                if (c == std::partial_ordering::greater) return std::strong_ordering::greater;
                return std::strong_ordering::equal;
            } else {
                return x <=> y;
            }
        },
        a.v_);
}

namespace {
std::string join_values(const std::vector<Value>& items, std::string (*fn)(const Value&)) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i) out += ", ";
        out += fn(items[i]);
    }
    return out;
}
} // namespace

std::string display(const Value& v) {
    return std::visit(
        [](const auto& x) -> std::string {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, Undef>) return "UNDEF";
            else if constexpr (std::is_same_v<T, EntityId>) return x.id;
            else if constexpr (std::is_same_v<T, std::string>) return x;
            else if constexpr (std::is_same_v<T, Number>) return x.to_string();
            else if constexpr (std::is_same_v<T, bool>) return x ? "true" : "false";
            else if constexpr (std::is_same_v<T, Date>) return x.iso();
            else if constexpr (std::is_same_v<T, TupleVal>) return "(" + join_values(x.items, display) + ")";
            else return "{" + join_values(x.items, display) + "}";
        },
        v.storage());
}

std::string to_literal(const Value& v) {
    if (v.is_string()) {
        std::string out = "'";
        for (char c : v.as_string()) {
            if (c == '\'') out += '\'';
            out += c;
        }
        return out + "'";
    }
    if (v.is_date())
        return "date '" + v.as_date().iso() + "'";
    if (v.is_bool())
        return v.as_bool() ? "TRUE" : "FALSE";
    if (v.is_tuple())
        return "(" + join_values(v.tuple_items(), to_literal) + ")";
    if (v.is_set())
        return "{" + join_values(v.set_items(), to_literal) + "}";
    return display(v);
}

Number count_value(const Value& set) {
    if (!set.is_set())
        return Number(0);
    return Number(static_cast<std::int64_t>(set.set_items().size()));
}

} // namespace lambdaq
