// lambdaq: load a schema and data, run LT queries, print translations.

#include "lambdaq/error.hpp"
#include "lambdaq/session.hpp"

#include "CLI11.hpp"

#include <iostream>
#include <map>
#include <unistd.h>

using namespace lambdaq;

namespace {

const std::map<std::string, Syntax> kSyntax{{"raw", Syntax::Raw}, {"friendly", Syntax::Friendly}};
const std::map<std::string, OutputFormat> kOutput{
    {"table", OutputFormat::Table}, {"csv", OutputFormat::Csv}, {"json", OutputFormat::Json}};
const std::map<std::string, Via> kVia{{"eval", Via::Eval}, {"plan", Via::Plan}};
const std::map<std::string, Target> kTarget{{"sql", Target::Sql}, {"cypher", Target::Cypher}, {"plan", Target::Plan}};

void load_rel_arg(Session& s, const std::string& arg) {
    auto eq = arg.find('=');
    if (eq == std::string::npos || eq == 0)
        throw Error(Errc::Io, "expected Name=path, got '" + arg + "'");
    s.load_relation(arg.substr(0, eq), read_file(arg.substr(eq + 1)));
}

template <class T>
bool set_flag(const std::map<std::string, T>& table, const std::string& word, T& into) {
    auto it = table.find(word);
    if (it == table.end())
        return false;
    into = it->second;
    return true;
}

const char* kReplHelp = R"(commands:
  :schema PATH        load a schema (clears data)
  :graph PATH         load graph lines
  :rel NAME=PATH      load a relation from CSV
  :mediation PATH     apply alias/rename lines
  :syntax raw|friendly
  :output table|csv|json
  :via eval|plan
  :sql QUERY | :cypher QUERY | :plan QUERY
  :help | :quit
anything else runs as a query
)";

int repl(Session& s, std::istream& in, std::ostream& out) {
    bool interactive = isatty(STDIN_FILENO);
    std::string line;
    int failures = 0;
    while (true) {
        if (interactive)
            out << "lq> " << std::flush;
        if (!std::getline(in, line))
            break;
        auto first = line.find_first_not_of(" \t");
        if (first == std::string::npos || line[first] == '#')
            continue;
        line = line.substr(first);
        std::string query;
        try {
            if (line[0] != ':') {
                query = line;
                out << s.cmd_query(line);
                continue;
            }
            auto space = line.find(' ');
            std::string cmd = line.substr(1, space == std::string::npos ? std::string::npos : space - 1);
            std::string rest = space == std::string::npos ? "" : line.substr(line.find_first_not_of(' ', space));
            query = rest;
            if (cmd == "quit" || cmd == "q")
                break;
            if (cmd == "help")
                out << kReplHelp;
            else if (cmd == "schema")
                s.load_schema(read_file(rest));
            else if (cmd == "graph")
                s.load_graph(read_file(rest));
            else if (cmd == "rel")
                load_rel_arg(s, rest);
            else if (cmd == "mediation")
                s.load_mediation(read_file(rest));
            else if (cmd == "syntax" && set_flag(kSyntax, rest, s.options.syntax))
                ;
            else if (cmd == "output" && set_flag(kOutput, rest, s.options.output))
                ;
            else if (cmd == "via" && set_flag(kVia, rest, s.options.via))
                ;
            else if (kTarget.contains(cmd))
                out << s.cmd_translate(rest, kTarget.at(cmd));
            else
                out << "unknown command '" << line << "' (:help lists commands)\n";
        } catch (const std::exception& e) {
            ++failures;
            out << render_diagnostic(e, query);
        }
    }
    return failures == 0 || interactive ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Typed lambda-calculus queries over a graph store and a relational store"};
    app.require_subcommand(1, 0);
    app.fallthrough();

    Session session;
    std::string syntax = "friendly", output = "table", via = "eval";
    std::uint64_t max_domain = session.options.eval.max_domain;
    app.add_option("--syntax", syntax, "Query syntax")->check(CLI::IsMember({"raw", "friendly"}));
    app.add_option("--output", output, "Result format")->check(CLI::IsMember({"table", "csv", "json"}));
    app.add_option("--via", via, "Run queries by reference evaluation or by the federated plan")
        ->check(CLI::IsMember({"eval", "plan"}));
    app.add_option("--max-domain", max_domain, "Bound on candidate assignments")
        ->envname("LAMBDAQ_MAX_DOMAIN")
        ->check(CLI::PositiveNumber);

    std::string schema_path, graph_path, mediation_path;
    std::vector<std::string> rel_args;
    auto* load_schema = app.add_subcommand("load-schema", "Load a schema file");
    load_schema->add_option("path", schema_path)->required();
    auto* load_graph = app.add_subcommand("load-graph", "Load graph lines");
    load_graph->add_option("path", graph_path)->required();
    auto* load_rel = app.add_subcommand("load-rel", "Load relations from CSV files");
    load_rel->add_option("relations", rel_args, "Name=path")->required();
    auto* load_mediation = app.add_subcommand("load-mediation", "Apply mediation lines");
    load_mediation->add_option("path", mediation_path)->required();

    std::string query_text, query_file;
    auto* query = app.add_subcommand("query", "Run a query");
    auto* qe = query->add_option("-e", query_text, "Query text");
    query->add_option("--file", query_file, "File holding the query")->excludes(qe);

    std::string tr_text, tr_file, target = "sql";
    auto* translate = app.add_subcommand("translate", "Print SQL, Cypher or the federated plan");
    auto* te = translate->add_option("-e", tr_text, "Query text");
    translate->add_option("--file", tr_file, "File holding the query")->excludes(te);
    translate->add_option("--target", target, "Output language")->check(CLI::IsMember({"sql", "cypher", "plan"}));

    auto* repl_cmd = app.add_subcommand("repl", "Read commands and queries from standard input");

    CLI11_PARSE(app, argc, argv);

    session.options.syntax = kSyntax.at(syntax);
    session.options.output = kOutput.at(output);
    session.options.via = kVia.at(via);
    session.options.eval.max_domain = max_domain;

    std::string current;
    try {
        for (auto* sub : app.get_subcommands()) {
            current.clear();
            if (sub == load_schema) {
                session.load_schema(read_file(schema_path));
            } else if (sub == load_graph) {
                session.load_graph(read_file(graph_path));
            } else if (sub == load_rel) {
                for (const auto& arg : rel_args)
                    load_rel_arg(session, arg);
            } else if (sub == load_mediation) {
                session.load_mediation(read_file(mediation_path));
            } else if (sub == query) {
                current = query_file.empty() ? query_text : read_file(query_file);
                std::cout << session.cmd_query(current);
            } else if (sub == translate) {
                current = tr_file.empty() ? tr_text : read_file(tr_file);
                std::cout << session.cmd_translate(current, kTarget.at(target));
            } else if (sub == repl_cmd) {
                return repl(session, std::cin, std::cout);
            }
        }
    } catch (const std::exception& e) {
        std::cout.flush();
        std::cerr << render_diagnostic(e, current);
        return 1;
    }
    return 0;
}
