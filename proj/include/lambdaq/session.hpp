#pragma once

#include "lambdaq/eval.hpp"
#include "lambdaq/parser.hpp"
#include "lambdaq/schema.hpp"
#include "lambdaq/store.hpp"

#include <optional>
#include <string>
#include <string_view>

namespace lambdaq {

enum class OutputFormat { Table, Csv, Json };
enum class Via { Eval, Plan };
enum class Target { Sql, Cypher, Plan };

struct SessionOptions {
    Syntax syntax = Syntax::Friendly;
    OutputFormat output = OutputFormat::Table;
    Via via = Via::Eval;
    EvalOptions eval;
};

/// One schema, its stores and the current flags. Queries fail with
/// Errc::NoSchema until a schema is loaded.
class Session {
public:
    SessionOptions options;

    void load_schema(std::string_view text);
    void load_graph(std::string_view text);
    void load_relation(const std::string& relation, std::string_view csv);
    void load_mediation(std::string_view text);

    bool has_schema() const noexcept { return schema_.has_value(); }
    const Schema& schema() const;
    const Stores& stores() const noexcept { return stores_; }

    /// Parses, checks and runs `text`; rows sorted by rendered values.
    std::string cmd_query(std::string_view text) const;
    std::string cmd_translate(std::string_view text, Target target) const;

    /// Runs a query and returns the relation itself.
    Relation run(std::string_view text) const;

private:
    std::optional<Schema> schema_;
    Stores stores_;

    Term parse(std::string_view text) const;
};

std::string render_relation(const Relation& r, OutputFormat format);

/// `error: <what>`, plus the query line with the span underlined when the
/// error points into `query`.
std::string render_diagnostic(const std::exception& e, std::string_view query = {});

/// File contents; throws Errc::Io.
std::string read_file(const std::string& path);

} // namespace lambdaq
