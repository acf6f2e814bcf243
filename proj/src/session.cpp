#include "lambdaq/session.hpp"

#include "lambdaq/error.hpp"
#include "lambdaq/translate.hpp"
#include "lambdaq/typecheck.hpp"

#include "json.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace lambdaq {

void Session::load_schema(std::string_view text) {
    schema_ = load_schema_text(text);
    stores_ = Stores{};
}

const Schema& Session::schema() const {
    if (!schema_)
        throw Error(Errc::NoSchema, "no schema loaded");
    return *schema_;
}

void Session::load_graph(std::string_view text) { stores_.graph = load_graph_lines(text, schema()); }

void Session::load_relation(const std::string& relation, std::string_view csv) {
    RelStore fresh = stores_.rel;
    load_relation_csv(relation, csv, schema(), fresh);
    stores_.rel = std::move(fresh);
}

void Session::load_mediation(std::string_view text) {
    if (!schema_)
        throw Error(Errc::NoSchema, "no schema loaded");
    Schema next = *schema_;
    load_mediation_text(text, next);
    schema_ = std::move(next);
}

Term Session::parse(std::string_view text) const { return parse_query(text, schema(), options.syntax); }

Relation Session::run(std::string_view text) const {
    Term t = parse(text);
    if (options.via == Via::Plan)
        return execute_plan(plan_federated(t, schema()), stores_, schema(), options.eval);
    return eval_query(t, stores_, schema(), options.eval);
}

std::string Session::cmd_query(std::string_view text) const { return render_relation(run(text), options.output); }

std::string Session::cmd_translate(std::string_view text, Target target) const {
    Term t = parse(text);
    switch (target) {
    case Target::Sql: return to_sql(t, schema()) + "\n";
    case Target::Cypher: return to_cypher(t, schema()) + "\n";
    case Target::Plan: return render_plan(plan_federated(t, schema()));
    }
    return {};
}

namespace {

std::vector<std::vector<std::string>> sorted_cells(const Relation& r) {
    std::vector<std::vector<std::string>> rows;
    for (const auto& row : r.rows) {
        std::vector<std::string> cells;
        for (const auto& v : row)
            cells.push_back(display(v));
        rows.push_back(std::move(cells));
    }
    std::sort(rows.begin(), rows.end());
    return rows;
}

nlohmann::json to_json(const Value& v) {
    if (v.is_number()) {
        const Number& n = v.as_number();
        return n.is_integer() ? nlohmann::json(n.as_int()) : nlohmann::json(n.as_double());
    }
    if (v.is_bool())
        return v.as_bool();
    if (v.is_undef())
        return nullptr;
    if (v.is_tuple() || v.is_set()) {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& x : v.is_tuple() ? v.tuple_items() : v.set_items())
            arr.push_back(to_json(x));
        return arr;
    }
    return display(v);
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos)
        return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"')
            out += '"';
        out += c;
    }
    return out + "\"";
}

} // namespace

std::string render_relation(const Relation& r, OutputFormat format) {
    std::vector<std::string> header;
    for (const auto& [n, t] : r.signature.columns)
        header.push_back(n);

    if (format == OutputFormat::Json) {
        // Same order as the other formats.
        std::vector<std::pair<std::vector<std::string>, const Row*>> order;
        for (const auto& row : r.rows) {
            std::vector<std::string> key;
            for (const auto& v : row)
                key.push_back(display(v));
            order.emplace_back(std::move(key), &row);
        }
        std::sort(order.begin(), order.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
        nlohmann::json out;
        out["columns"] = header;
        out["rows"] = nlohmann::json::array();
        for (const auto& [key, row] : order) {
            nlohmann::json arr = nlohmann::json::array();
            for (const auto& v : *row)
                arr.push_back(to_json(v));
            out["rows"].push_back(std::move(arr));
        }
        return out.dump() + "\n";
    }

    auto rows = sorted_cells(r);
    std::ostringstream os;
    if (format == OutputFormat::Csv) {
        auto line = [&](const std::vector<std::string>& cells) {
            for (std::size_t i = 0; i < cells.size(); ++i)
                os << (i ? "," : "") << csv_field(cells[i]);
            os << "\n";
        };
        line(header);
        for (const auto& row : rows)
            line(row);
        return os.str();
    }

    std::vector<std::size_t> width(header.size());
    for (std::size_t i = 0; i < header.size(); ++i)
        width[i] = header[i].size();
    for (const auto& row : rows)
        for (std::size_t i = 0; i < row.size(); ++i)
            width[i] = std::max(width[i], row[i].size());
    auto line = [&](const std::vector<std::string>& cells) {
        std::string text;
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i)
                text += " | ";
            text += cells[i];
            if (i + 1 < cells.size())
                text.append(width[i] - cells[i].size(), ' ');
        }
        os << text << "\n";
    };
    line(header);
    std::string rule;
    for (std::size_t i = 0; i < width.size(); ++i)
        rule += (i ? "-+-" : "") + std::string(width[i], '-');
    os << rule << "\n";
    for (const auto& row : rows)
        line(row);
    os << "(" << rows.size() << (rows.size() == 1 ? " row" : " rows") << ")\n";
    return os.str();
}

std::string render_diagnostic(const std::exception& e, std::string_view query) {
    std::string out = "error: " + std::string(e.what()) + "\n";
    const auto* err = dynamic_cast<const Error*>(&e);
    if (!err || !err->span() || query.empty() || err->span()->start > query.size())
        return out;
    std::size_t start = err->span()->start;
    std::size_t end = std::min(std::max(err->span()->end, start + 1), query.size());
    std::size_t line_start = query.rfind('\n', start == 0 ? 0 : start - 1);
    line_start = (line_start == std::string_view::npos || start == 0) ? 0 : line_start + 1;
    std::size_t line_end = query.find('\n', start);
    if (line_end == std::string_view::npos)
        line_end = query.size();
    end = std::min(end, line_end);
    // Columns count code points, not bytes.
    auto width = [&](std::size_t from, std::size_t to) {
        std::size_t n = 0;
        for (std::size_t i = from; i < to; ++i)
            if ((static_cast<unsigned char>(query[i]) & 0xC0) != 0x80)
                ++n;
        return n;
    };
    out += "  " + std::string(query.substr(line_start, line_end - line_start)) + "\n";
    out += "  " + std::string(width(line_start, start), ' ') + std::string(std::max<std::size_t>(1, width(start, end)), '^') +
           "\n";
    return out;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(Errc::Io, "cannot read '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace lambdaq
