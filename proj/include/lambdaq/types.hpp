#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace lambdaq {

enum class Carrier { String, Number, Bool, Date };
enum class BaseKind { Entity, Descriptive };

std::string_view to_string(Carrier c);
std::optional<Carrier> carrier_from_string(std::string_view s);

/// An elementary type. Entity types denote sets of node IDs, descriptive types
/// denote printable values of one carrier.
struct BaseType {
    std::string name;
    BaseKind kind = BaseKind::Descriptive;
    std::optional<Carrier> carrier; ///< empty for entity types

    bool operator==(const BaseType&) const = default;
};

/// Type tree: a base name, a functional type (S:R1, ..., Rn) or a tuple type
/// (R1, ..., Rn). For Func, items[0] is the result and items[1..] the arguments.
class TypeExpr {
public:
    enum class Kind { Base, Func, Tuple };

    static TypeExpr base(std::string name);
    static TypeExpr func(TypeExpr result, std::vector<TypeExpr> args);
    static TypeExpr tuple(std::vector<TypeExpr> components);

    Kind kind() const noexcept { return kind_; }
    bool is_base() const noexcept { return kind_ == Kind::Base; }
    bool is_func() const noexcept { return kind_ == Kind::Func; }
    bool is_tuple() const noexcept { return kind_ == Kind::Tuple; }

    /// Base name; empty unless is_base().
    const std::string& name() const noexcept { return name_; }
    const TypeExpr& result() const { return items_.front(); }
    std::span<const TypeExpr> args() const { return std::span(items_).subspan(1); }
    std::span<const TypeExpr> components() const { return items_; }

    bool operator==(const TypeExpr&) const = default;
    auto operator<=>(const TypeExpr& other) const = default;

private:
    Kind kind_ = Kind::Base;
    std::string name_;
    std::vector<TypeExpr> items_;
};

bool type_equal(const TypeExpr& a, const TypeExpr& b);

/// Parses the parenthesized notation, e.g. "((Bool: Stars, Movie): User)".
/// Only syntax is checked here; Schema::parse_type also checks base names.
TypeExpr parse_type(std::string_view text);

/// Canonical rendering: one space after every comma and colon.
std::string render_type(const TypeExpr& t);

/// All base names occurring in t, in first-occurrence order.
std::vector<std::string> base_names(const TypeExpr& t);

/// Type of a Bool-valued characteristic function over the given arguments.
TypeExpr bool_func(std::vector<TypeExpr> args);

inline constexpr std::string_view kBoolBase = "Bool";
inline constexpr std::string_view kNumberBase = "Number";
inline constexpr std::string_view kStringBase = "String";
inline constexpr std::string_view kDateBase = "Date";

bool is_identifier(std::string_view s);

} // namespace lambdaq
