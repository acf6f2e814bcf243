#include "support.hpp"

#include <gtest/gtest.h>

using namespace lqtest;

namespace {

Term tv(const std::string& n, const std::string& base) { return Term::var(n, TypeExpr::base(base)); }
Binder tb(const std::string& n, const std::string& base) { return Binder{n, TypeExpr::base(base)}; }
Term movie_of(Term m) { return Term::app(Term::attr("Movie"), {std::move(m)}); }

Errc check_error(const Term& t) {
    auto w = movies_small();
    try {
        check_query(t, w.schema);
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "accepted " << render_term(t);
    return Errc::Io;
}

Term spielberg() { return Term::constant(Value("Spielberg"), TypeExpr::base("Director")); }

} // namespace

TEST(Typecheck, Signatures) {
    auto w = movies_small();
    auto sig = check_query(friendly(kCountQuery, w.schema), w.schema);
    ASSERT_EQ(sig.columns.size(), 3u);
    EXPECT_EQ(sig.columns[0], (std::pair<std::string, TypeExpr>{"u", TypeExpr::base("User")}));
    EXPECT_EQ(sig.columns[1].second, TypeExpr::base("Genre"));
    EXPECT_EQ(sig.columns[2].second, TypeExpr::base("Number"));
    EXPECT_EQ(check_query(raw(kDivisionRaw, w.schema), w.schema).columns[0].second, TypeExpr::base("Name"));
}

TEST(Typecheck, InferTypes) {
    auto w = movies_small();
    TypeEnv env;
    env.push({tb("m", "Movie"), tb("u", "User")});
    EXPECT_EQ(infer_type(movie_of(tv("m", "Movie")), env, w.schema), parse_type("(Title, Director, Released)"));
    Term rates_u = Term::app(Term::attr("Rates"), {tv("u", "User")});
    EXPECT_EQ(infer_type(rates_u, env, w.schema), parse_type("(Bool: Stars, Movie)"));
    Term comp = Term::component(movie_of(tv("m", "Movie")), 2);
    EXPECT_EQ(infer_type(comp, env, w.schema), TypeExpr::base("Director"));
    Term match = Term::app(movie_of(tv("m", "Movie")),
                           {Term::constant(Value("Jaws"), TypeExpr::base("Title")), spielberg(),
                            Term::constant(Value(1975), TypeExpr::base("Released"))});
    EXPECT_EQ(infer_type(match, env, w.schema), TypeExpr::base("Bool"));
}

TEST(Typecheck, ArityMismatch) {
    Term t = Term::lambda({tb("t", "Title")},
                          Term::exists({tb("m", "Movie")}, Term::app(movie_of(tv("m", "Movie")), {tv("t", "Title"), spielberg()})));
    EXPECT_EQ(check_error(t), Errc::ArityMismatch);
}

TEST(Typecheck, TypeMismatch) {
    Term t = Term::lambda({tb("t", "Title")}, Term::app(Term::attr("Movies"), {spielberg(), tv("t", "Title"), spielberg(), spielberg()}));
    EXPECT_EQ(check_error(t), Errc::TypeMismatch);
    Term cmp = Term::lambda({tb("t", "Title")}, Term::compare(CmpOp::Eq, tv("t", "Title"), spielberg()));
    EXPECT_EQ(check_error(cmp), Errc::TypeMismatch);
}

TEST(Typecheck, AliasedBasesCompare) {
    Schema s = load_schema_text(slurp(fixture_file("schema-aliased.lq")));
    Term t = Term::lambda({tb("a", "Title_g"), tb("b", "Title_r")}, Term::compare(CmpOp::Eq, tv("a", "Title_g"), tv("b", "Title_r")));
    EXPECT_NO_THROW(check_query(t, s));
}

TEST(Typecheck, ShapeErrors) {
    EXPECT_EQ(check_error(Term::exists({tb("t", "Title")}, Term::app(Term::attr("Movies"), {tv("t", "Title")}))), Errc::NotLambda);
    EXPECT_EQ(check_error(Term::lambda({tb("t", "Title")}, tv("t", "Title"))), Errc::BodyNotBool);
    EXPECT_EQ(check_error(Term::lambda({tb("t", "Title")}, Term::compare(CmpOp::Eq, tv("t", "Title"), tv("x", "Title")))),
              Errc::NotClosed);
    Term comp = Term::lambda({tb("t", "Title")}, Term::exists({tb("m", "Movie")},
                                                              Term::compare(CmpOp::Eq, Term::component(movie_of(tv("m", "Movie")), 4), tv("t", "Title"))));
    EXPECT_EQ(check_error(comp), Errc::ComponentOutOfRange);
    Term qbody = Term::lambda({tb("t", "Title")}, Term::exists({tb("m", "Movie")}, tv("t", "Title")));
    EXPECT_EQ(check_error(qbody), Errc::NonBoolQuantifierBody);
}

TEST(Typecheck, CountTyping) {
    auto w = movies_small();
    Term ok = raw("lambda u^User, n^Number (n = COUNT_Movie(lambda m^Movie (exists s Rates(u)(s, m))))", w.schema);
    EXPECT_NO_THROW(check_query(ok, w.schema));
    Term wrong = Term::lambda({tb("u", "User"), tb("n", "Number")},
                              Term::compare(CmpOp::Eq, tv("n", "Number"),
                                            Term::count("User", Term::lambda({tb("m", "Movie")}, Term::app(Term::app(Term::attr("FOF"), {tv("u", "User")}), {tv("u", "User")})))));
    EXPECT_EQ(check_error(wrong), Errc::TypeMismatch);
}
