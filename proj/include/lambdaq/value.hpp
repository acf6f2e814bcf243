#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace lambdaq {

/// One numeric tower: exact 64-bit integers, with decimal fractions held as
/// doubles. Integral doubles are normalized to the integer form so equality is
/// value equality.
class Number {
public:
    Number() = default;
    Number(std::int64_t v) : int_(v) {} // NOLINT(google-explicit-constructor)
    static Number from_double(double d);

    bool is_integer() const noexcept { return is_int_; }
    std::int64_t as_int() const noexcept { return int_; }
    double as_double() const noexcept { return is_int_ ? static_cast<double>(int_) : dbl_; }

    friend bool operator==(const Number& a, const Number& b) { return (a <=> b) == 0; }
    friend std::partial_ordering operator<=>(const Number& a, const Number& b);

    friend Number operator+(const Number& a, const Number& b);
    friend Number operator-(const Number& a, const Number& b);
    friend Number operator*(const Number& a, const Number& b);

    std::string to_string() const;
    static std::optional<Number> parse(std::string_view text);

private:
    bool is_int_ = true;
    std::int64_t int_ = 0;
    double dbl_ = 0.0;
};

/// Calendar date kept in ISO form, which also makes text order chronological.
class Date {
public:
    static std::optional<Date> parse(std::string_view text);
    const std::string& iso() const noexcept { return iso_; }
    auto operator<=>(const Date&) const = default;

private:
    std::string iso_;
};

struct Undef {
    auto operator<=>(const Undef&) const = default;
};

struct EntityId {
    std::string type;
    std::string id;
    auto operator<=>(const EntityId&) const = default;
};

class Value;

struct TupleVal {
    std::vector<Value> items;
};

/// Sorted, duplicate-free finite set.
struct SetVal {
    std::vector<Value> items;
};

class Value {
public:
    using Storage = std::variant<Undef, EntityId, std::string, Number, bool, Date, TupleVal, SetVal>;

    Value() = default;
    Value(Undef u) : v_(u) {}                              // NOLINT
    Value(EntityId e) : v_(std::move(e)) {}                // NOLINT
    Value(std::string s) : v_(std::move(s)) {}             // NOLINT
    Value(const char* s) : v_(std::string(s)) {}           // NOLINT
    Value(Number n) : v_(n) {}                             // NOLINT
    Value(std::int64_t n) : v_(Number(n)) {}               // NOLINT
    Value(int n) : v_(Number(static_cast<std::int64_t>(n))) {} // NOLINT
    Value(bool b) : v_(b) {}                               // NOLINT
    Value(Date d) : v_(std::move(d)) {}                    // NOLINT
    Value(TupleVal t) : v_(std::move(t)) {}                // NOLINT
    Value(SetVal s) : v_(std::move(s)) {}                  // NOLINT

    static Value entity(std::string type, std::string id) { return EntityId{std::move(type), std::move(id)}; }
    static Value tuple(std::vector<Value> items) { return TupleVal{std::move(items)}; }
    /// Sorts and deduplicates.
    static Value set(std::vector<Value> items);

    bool is_undef() const noexcept { return std::holds_alternative<Undef>(v_); }
    bool is_entity() const noexcept { return std::holds_alternative<EntityId>(v_); }
    bool is_string() const noexcept { return std::holds_alternative<std::string>(v_); }
    bool is_number() const noexcept { return std::holds_alternative<Number>(v_); }
    bool is_bool() const noexcept { return std::holds_alternative<bool>(v_); }
    bool is_date() const noexcept { return std::holds_alternative<Date>(v_); }
    bool is_tuple() const noexcept { return std::holds_alternative<TupleVal>(v_); }
    bool is_set() const noexcept { return std::holds_alternative<SetVal>(v_); }
    bool is_scalar() const noexcept { return !is_undef() && !is_tuple() && !is_set(); }

    const EntityId& as_entity() const { return std::get<EntityId>(v_); }
    const std::string& as_string() const { return std::get<std::string>(v_); }
    const Number& as_number() const { return std::get<Number>(v_); }
    bool as_bool() const { return std::get<bool>(v_); }
    const Date& as_date() const { return std::get<Date>(v_); }
    const std::vector<Value>& tuple_items() const { return std::get<TupleVal>(v_).items; }
    const std::vector<Value>& set_items() const { return std::get<SetVal>(v_).items; }
    bool set_contains(const Value& v) const;

    /// True if Undef occurs anywhere inside.
    bool contains_undef() const;

    const Storage& storage() const noexcept { return v_; }

    friend std::strong_ordering compare(const Value& a, const Value& b);
    friend bool operator==(const Value& a, const Value& b) { return compare(a, b) == 0; }
    friend std::strong_ordering operator<=>(const Value& a, const Value& b) { return compare(a, b); }

private:
    Storage v_;
};

using Row = std::vector<Value>;

/// Plain display form: strings unquoted, entities by id, booleans as true/false.
std::string display(const Value& v);

/// Literal form used in query text and data files: strings single-quoted.
std::string to_literal(const Value& v);

/// Number of elements of a finite set; 0 for anything else.
Number count_value(const Value& set);

} // namespace lambdaq
