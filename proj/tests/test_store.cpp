#include "support.hpp"

#include <gtest/gtest.h>

using namespace lqtest;

namespace {

Errc load_error(const std::string& graph, const std::string& movies_csv = "Title,Released,Director,Genre\n") {
    auto w = movies_small();
    try {
        Stores st;
        st.graph = load_graph_lines(graph, w.schema);
        load_relation_csv("Movies", movies_csv, w.schema, st.rel);
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "accepted:\n" << graph << movies_csv;
    return Errc::Io;
}

} // namespace

TEST(Store, NodeProperties) {
    auto w = movies_small();
    EXPECT_EQ(w.stores.graph.lookup("Movie", "m1"), Value::tuple({Value("Jaws"), Value("Spielberg"), Value(1975)}));
    EXPECT_TRUE(w.stores.graph.lookup("Movie", "m9").is_undef());
    EXPECT_EQ(w.stores.graph.entities("User").size(), 3u);
}

TEST(Store, MultivaluedEdges) {
    auto w = movies_small();
    Value rated = w.stores.graph.members("Rates", "u1");
    EXPECT_EQ(rated, Value::set({Value::tuple({Value(5), Value::entity("Movie", "m1")}),
                                 Value::tuple({Value(3), Value::entity("Movie", "m3")})}));
    EXPECT_EQ(w.stores.graph.members("FOF", "u1"), Value::set({Value::entity("User", "u2")}));
    EXPECT_TRUE(w.stores.graph.members("FOF", "u3").set_items().empty());
    EXPECT_EQ(w.stores.graph.lookup("Submittes_to", "u1"),
              Value::tuple({Value(*Date::parse("2020-01-01")), Value::entity("Journal", "j1")}));
}

TEST(Store, Relations) {
    auto w = movies_small();
    EXPECT_EQ(w.stores.rel.size("Movies"), 4u);
    EXPECT_EQ(w.stores.rel.size("Actors"), 7u);
    EXPECT_TRUE(test_membership(w.stores, w.schema, "Movies",
                                {Value("Jaws"), Value(1975), Value("Spielberg"), Value("Thriller")}));
    EXPECT_FALSE(test_membership(w.stores, w.schema, "Movies",
                                 {Value("Jaws"), Value(1976), Value("Spielberg"), Value("Thriller")}));
}

TEST(Store, ActiveDomains) {
    auto w = movies_small();
    EXPECT_EQ(active_domain("Director", {}, w.stores, w.schema),
              (std::vector<Value>{Value("Scott"), Value("Spielberg")}));
    std::vector<Value> extra{Value("Nolan")};
    EXPECT_EQ(active_domain("Director", extra, w.stores, w.schema).size(), 3u);
    auto titles = active_domain("Title", {}, w.stores, w.schema);
    EXPECT_EQ(titles, (std::vector<Value>{Value("Alien"), Value("E.T."), Value("Jaws"), Value("Lincoln")}));
    EXPECT_EQ(active_domain("Movie", {}, w.stores, w.schema).size(), 3u);
}

TEST(Store, AliasedActiveDomainSpansBothBases) {
    auto w = aliased("node Movie m1 {Title_g: \"Jaws\", Director: \"Spielberg\", Released: 1975}\n", "Title_r,Released,Director,Genre\nDuel,1971,Spielberg,Thriller\n");
    auto dom = active_domain("Title_g", {}, w.stores, w.schema);
    EXPECT_EQ(dom, (std::vector<Value>{Value("Duel"), Value("Jaws")}));
}

TEST(Store, ScanRowsUseLayout) {
    auto w = movies_small();
    auto rows = scan_rows(w.stores, w.schema, w.schema.resolve_attribute("Rates"));
    EXPECT_EQ(rows.size(), 4u);
    EXPECT_EQ(rows.front().size(), 3u);
}

TEST(Store, LoadErrors) {
    EXPECT_EQ(load_error("edge FOF u1 -> u2\n"), Errc::UnknownEntityType);
    EXPECT_EQ(load_error("node Movie m1 {Released: \"soon\"}\n"), Errc::TypeMismatch);
    EXPECT_EQ(load_error("", "Title,Genre\n"), Errc::HeaderMismatch);
    EXPECT_EQ(load_error("", "Title,Released,Director,Genre\nJaws,1975\n"), Errc::ArityMismatch);
    EXPECT_EQ(load_error("", "Title,Released,Director,Genre\nJaws,later,Spielberg,Thriller\n"), Errc::TypeMismatch);
}

TEST(Store, CsvQuoting) {
    auto rows = parse_csv("a,b\n\"x, y\",\"say \"\"hi\"\"\"\n");
    ASSERT_EQ(rows.size(), 2u);
    EXPECT_EQ(rows[1][0], "x, y");
    EXPECT_EQ(rows[1][1], "say \"hi\"");
}
