#include "support.hpp"

#include <gtest/gtest.h>

using namespace lqtest;

namespace {

std::string golden(const std::string& name) {
    std::string text = slurp(std::string(GOLDEN_DIR) + "/" + name);
    while (!text.empty() && text.back() == '\n')
        text.pop_back();
    return text;
}

Errc translate_error(const std::string& q, bool sql) {
    auto w = movies_small();
    try {
        Term t = friendly(q, w.schema);
        sql ? to_sql(t, w.schema) : to_cypher(t, w.schema);
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "translated " << q;
    return Errc::Io;
}

Relation compiled(const Term& t, const World& w) {
    return execute_compiled(compile_query(t, w.schema), check_query(t, w.schema), t, w.stores, w.schema);
}

} // namespace

TEST(Translate, SqlGoldenDivision) {
    auto w = movies_small();
    EXPECT_EQ(to_sql(friendly(kDivisionFriendly, w.schema), w.schema), golden("division.sql"));
    EXPECT_EQ(to_sql(raw(kDivisionRaw, w.schema), w.schema), golden("division.sql"));
}

TEST(Translate, CypherGoldenSpielbergTitles) {
    auto w = movies_small();
    EXPECT_EQ(to_cypher(friendly(kTitlesFriendly, w.schema), w.schema), golden("spielberg_titles.cypher"));
    EXPECT_EQ(to_cypher(raw(kTitlesRaw, w.schema), w.schema), golden("spielberg_titles.cypher"));
}

TEST(Translate, SingleAtomSql) {
    auto w = movies_small();
    Term t = raw("lambda t (exists re, g Movies(t, re, 'Spielberg', g))", w.schema);
    EXPECT_EQ(to_sql(t, w.schema), "SELECT DISTINCT t1.Title FROM Movies t1 WHERE t1.Director = 'Spielberg'");
    EXPECT_EQ(text_rows(compiled(t, w)), (std::set<std::vector<std::string>>{{"E.T."}, {"Jaws"}, {"Lincoln"}}));
}

TEST(Translate, EdgePatternCypher) {
    auto w = movies_small();
    Term t = raw("lambda u (exists s, m Rates(u)(s, m))", w.schema);
    EXPECT_EQ(to_cypher(t, w.schema), "MATCH (u:User)-[r1:Rates]->(m:Movie) RETURN DISTINCT u");
    EXPECT_EQ(text_rows(compiled(t, w)), (std::set<std::vector<std::string>>{{"u1"}, {"u2"}}));
    Term stars = raw("lambda u (exists m Rates(u)(5, m))", w.schema);
    EXPECT_EQ(to_cypher(stars, w.schema), "MATCH (u:User)-[r1:Rates]->(m:Movie) WHERE r1.Stars = 5 RETURN DISTINCT u");
}

TEST(Translate, CountAsScalarSubquery) {
    auto w = movies_small();
    Term t = raw("lambda g^Genre, n^Number (n = COUNT_Title(lambda t^Title (exists r, d Movies(t, r, d, g))))", w.schema);
    EXPECT_EQ(to_sql(t, w.schema), "SELECT DISTINCT t1.Genre, (SELECT COUNT(DISTINCT t2.Title) FROM Movies t2 WHERE "
                                   "t2.Genre = t1.Genre) AS n FROM Movies t1");
    EXPECT_EQ(compiled(t, w), eval_query(t, w.stores, w.schema));
    EXPECT_EQ(translate_error("lambda u^User, n^Number (n = COUNT_Movie(lambda m^Movie (exists s^Stars Rates(u)(s, m))))",
                              false),
              Errc::UnsupportedConstruct);
}

TEST(Translate, WrongSourceRejected) {
    EXPECT_EQ(translate_error(kTitlesFriendly, true), Errc::UnsupportedConstruct);
    EXPECT_EQ(translate_error(kDivisionFriendly, false), Errc::UnsupportedConstruct);
}

TEST(Translate, DisjunctionUnsupported) {
    EXPECT_EQ(translate_error("lambda t^Title (exists r^Released, d^Director, g^Genre Movies(t, r, d, g) and "
                              "(d = 'Scott' or g = 'Drama'))",
                              true),
              Errc::UnsupportedConstruct);
}

TEST(Translate, CompiledExecutionMatchesEval) {
    auto w = movies_small();
    for (const char* q : {kTitlesRaw, kDivisionRaw, kCountQuery,
                          "lambda n (exists t, ro Actors(n, t, ro) and not exists re, g Movies(t, re, 'Spielberg', g))",
                          "lambda u, v (FOF(u)(v) and not FOF(v)(u))",
                          "lambda t (exists m, d, r Movie(m)(t, d, r) and r < 2000)",
                          "lambda u (forall m (exists s Rates(u)(s, m) implies exists t, r Movie(m)(t, 'Spielberg', r)))"}) {
        Term t = friendly(q, w.schema);
        EXPECT_EQ(compiled(t, w), eval_query(t, w.stores, w.schema)) << q;
    }
}

TEST(Translate, Deterministic) {
    auto w = movies_small();
    Term t = raw(kDivisionRaw, w.schema);
    std::string first = to_sql(t, w.schema);
    for (int i = 0; i < 5; ++i)
        EXPECT_EQ(to_sql(raw(kDivisionRaw, w.schema), w.schema), first);
}

TEST(Translate, UnsupportedSpanPointsAtNode) {
    auto w = movies_small();
    std::string q = "{t^Title | exists m^Movie Movie(m^Movie)(t^Title, 'Spielberg'^Director)}";
    try {
        to_sql(friendly(q, w.schema), w.schema);
        FAIL();
    } catch (const Error& e) {
        ASSERT_TRUE(e.span().has_value());
        EXPECT_EQ(q.substr(e.span()->start, e.span()->end - e.span()->start), "Movie");
    }
}
