#include "support.hpp"

#include <fstream>
#include <map>
#include <sstream>

namespace lqtest {

std::string fixture_file(const std::string& name) { return std::string(FIXTURE_DIR) + "/" + name; }

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("missing fixture file " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

World movies_small(bool with_mediation) {
    World w;
    w.schema = load_schema_text(slurp(fixture_file("schema.lq")));
    if (with_mediation)
        load_mediation_text(slurp(fixture_file("mediation.lq")), w.schema);
    w.stores.graph = load_graph_lines(slurp(fixture_file("graph.lq")), w.schema);
    load_relation_csv("Movies", slurp(fixture_file("Movies.csv")), w.schema, w.stores.rel);
    load_relation_csv("Actors", slurp(fixture_file("Actors.csv")), w.schema, w.stores.rel);
    return w;
}

World aliased(const std::string& graph_lines, const std::string& movies_csv) {
    World w;
    w.schema = load_schema_text(slurp(fixture_file("schema-aliased.lq")));
    w.stores.graph = load_graph_lines(graph_lines, w.schema);
    load_relation_csv("Movies", movies_csv, w.schema, w.stores.rel);
    return w;
}

Term raw(const std::string& text, const Schema& s) { return parse_query(text, s, Syntax::Raw); }
Term friendly(const std::string& text, const Schema& s) { return parse_query(text, s, Syntax::Friendly); }

std::set<std::vector<std::string>> text_rows(const Relation& r) {
    std::set<std::vector<std::string>> out;
    for (const auto& row : r.rows) {
        std::vector<std::string> cells;
        for (const auto& v : row)
            cells.push_back(display(v));
        out.insert(std::move(cells));
    }
    return out;
}

const char* const kTitlesRaw = "lambda t (exists m, r Movie(m)(t, 'Spielberg', r))";
const char* const kDivisionRaw =
    "lambda n (forall t (exists re, g Movies(t, re, 'Spielberg', g) implies exists ro Actors(n, t, ro)))";
const char* const kTitlesFriendly = "{t^Title | exists m^Movie Movie(m^Movie)(t^Title, 'Spielberg'^Director)}";
const char* const kDivisionFriendly =
    "{n^Name | foreach t^Title (Movies(t^Title, 'Spielberg'^Director) implies Actors(n^Name, t^Title))}";
const char* const kCountQuery =
    "lambda u^User, g^Genre, n^Number (n^Number = COUNT_Movie (lambda m^Movie (Rates(u^User)(m^Movie) and "
    "exists t^Title s^Title Movie(m^Movie).t^Title = s^Title and Movies(s^Title, g^Genre))))";

namespace {

std::string str(const Value& v) { return display(v); }

/// Relation tuples as display strings.
std::vector<std::vector<std::string>> tuples(const Stores& st, const std::string& rel) {
    std::vector<std::vector<std::string>> out;
    for (const auto& row : st.rel.tuples(rel)) {
        std::vector<std::string> cells;
        for (const auto& v : row)
            cells.push_back(str(v));
        out.push_back(std::move(cells));
    }
    return out;
}

std::vector<std::string> ids(const Stores& st, const std::string& type) {
    std::vector<std::string> out;
    for (const auto& v : st.graph.entities(type))
        out.push_back(v.as_entity().id);
    return out;
}

} // namespace

std::set<std::vector<std::string>> oracle_titles(const Stores& st) {
    std::set<std::vector<std::string>> out;
    for (const auto& m : ids(st, "Movie")) {
        Value props = st.graph.lookup("Movie", m);
        if (!props.is_tuple())
            continue;
        const auto& items = props.tuple_items();
        if (items[1].is_string() && items[1].as_string() == "Spielberg")
            out.insert({str(items[0])});
    }
    return out;
}

std::set<std::vector<std::string>> oracle_division(const Stores& st) {
    // Candidate names: every Name value stored anywhere.
    std::set<std::string> names;
    for (const auto& a : tuples(st, "Actors"))
        names.insert(a[0]);
    for (const auto& u : ids(st, "User")) {
        Value props = st.graph.lookup("User", u);
        if (props.is_tuple() && !props.tuple_items()[1].is_undef())
            names.insert(str(props.tuple_items()[1]));
    }
    std::set<std::string> spielberg;
    for (const auto& m : tuples(st, "Movies"))
        if (m[2] == "Spielberg")
            spielberg.insert(m[0]);
    std::set<std::vector<std::string>> out;
    for (const auto& n : names) {
        bool all = true;
        for (const auto& t : spielberg) {
            bool plays = false;
            for (const auto& a : tuples(st, "Actors"))
                if (a[0] == n && a[1] == t)
                    plays = true;
            all = all && plays;
        }
        if (all)
            out.insert({n});
    }
    return out;
}

std::set<std::vector<std::string>> oracle_count(const Stores& st) {
    std::set<std::string> genres;
    for (const auto& m : tuples(st, "Movies"))
        genres.insert(m[3]);
    std::set<std::vector<std::string>> out;
    for (const auto& u : ids(st, "User")) {
        Value rated = st.graph.members("Rates", u);
        for (const auto& g : genres) {
            std::set<std::string> counted;
            for (const auto& edge : rated.set_items()) {
                const Value& movie = edge.is_tuple() ? edge.tuple_items().back() : edge;
                Value props = st.graph.lookup("Movie", movie.as_entity().id);
                if (!props.is_tuple() || props.tuple_items()[0].is_undef())
                    continue;
                std::string title = str(props.tuple_items()[0]);
                for (const auto& m : tuples(st, "Movies"))
                    if (m[0] == title && m[3] == g)
                        counted.insert(movie.as_entity().id);
            }
            out.insert({u, g, std::to_string(counted.size())});
        }
    }
    return out;
}

} // namespace lqtest
