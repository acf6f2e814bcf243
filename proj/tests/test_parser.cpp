#include "support.hpp"

#include <gtest/gtest.h>

using namespace lqtest;

namespace {

Errc parse_error(const std::string& text, Syntax syntax, std::optional<SourceSpan>* span = nullptr) {
    auto w = movies_small();
    try {
        parse_query(text, w.schema, syntax);
    } catch (const Error& e) {
        if (span)
            *span = e.span();
        return e.code();
    }
    ADD_FAILURE() << "accepted " << text;
    return Errc::Io;
}

} // namespace

TEST(Parser, SpielbergTitlesRawShape) {
    auto w = movies_small();
    Term t = raw(kTitlesRaw, w.schema);
    ASSERT_EQ(t.kind, TermKind::Lambda);
    ASSERT_EQ(t.binders.size(), 1u);
    EXPECT_EQ(t.binders[0].name, "t");
    EXPECT_EQ(*t.binders[0].type, TypeExpr::base("Title"));
    const Term& ex = t.body();
    ASSERT_EQ(ex.kind, TermKind::Exists);
    EXPECT_EQ(ex.binders.size(), 2u);
    EXPECT_EQ(*ex.binders[1].type, TypeExpr::base("Released"));
    const Term& app = ex.body();
    ASSERT_EQ(app.kind, TermKind::App);
    EXPECT_EQ(app.kids[0].kind, TermKind::App);
    EXPECT_EQ(app.kids[0].kids[0].name, "Movie");
}

TEST(Parser, FriendlyFormsMatchRaw) {
    auto w = movies_small();
    EXPECT_TRUE(alpha_equal(friendly(kTitlesFriendly, w.schema), raw(kTitlesRaw, w.schema)));
    EXPECT_TRUE(alpha_equal(friendly(kDivisionFriendly, w.schema), raw(kDivisionRaw, w.schema)));
}

TEST(Parser, UnicodeAndAsciiAgree) {
    auto w = movies_small();
    Term a = raw("λ t (∃ m, r Movie(m)(t, 'Spielberg', r) ∧ ¬ t = 'Up')", w.schema);
    Term b = raw("lambda t (exists m, r Movie(m)(t, 'Spielberg', r) and not t = 'Up')", w.schema);
    EXPECT_TRUE(alpha_equal(a, b));
    Term c = raw("λ n (∀ t (∃ re, g Movies(t, re, 'Spielberg', g) → ∃ ro Actors(n, t, ro)))", w.schema);
    EXPECT_TRUE(alpha_equal(c, raw(kDivisionRaw, w.schema)));
}

TEST(Parser, RenderParseRoundTrip) {
    auto w = movies_small();
    for (const char* q : {kTitlesRaw, kDivisionRaw, kCountQuery}) {
        Term t = friendly(q, w.schema);
        std::string text = render_term(t);
        Term back = raw(text, w.schema);
        EXPECT_TRUE(alpha_equal(t, back)) << text;
        EXPECT_EQ(render_term(back), text);
    }
}

TEST(Parser, RendersCount) {
    auto w = movies_small();
    std::string text = render_term(friendly(kCountQuery, w.schema));
    EXPECT_NE(text.find("COUNT_Movie(lambda m^Movie ("), std::string::npos) << text;
}

TEST(Parser, Literals) {
    auto w = movies_small();
    Term t = raw("lambda n (exists t, ro Actors(n, t, ro) and t = 'O''Neil')", w.schema);
    EXPECT_NE(render_term(t).find("'O''Neil'"), std::string::npos);
    Term d = raw("lambda u (exists j^Journal Submittes_to(u) = (date '2020-01-01', j))", w.schema);
    EXPECT_NE(render_term(d).find("date '2020-01-01'"), std::string::npos) << render_term(d);
    Term r = raw("lambda t (exists m, d, r Movie(m)(t, d, r) and r >= 1979.5)", w.schema);
    EXPECT_NE(render_term(r).find("1979.5"), std::string::npos);
}

TEST(Parser, DotBindingIsComponentEquality) {
    auto w = movies_small();
    Term dot = raw("lambda t (exists m Movie(m).t^Title = 'Jaws')", w.schema);
    Term plain = raw("lambda t (exists m (Movie(m)[1] = t and t = 'Jaws'))", w.schema);
    EXPECT_TRUE(alpha_equal(dot, plain)) << render_term(dot);
}

TEST(Parser, FriendlyElisionNeedsTags) {
    std::optional<SourceSpan> span;
    EXPECT_EQ(parse_error("{t^Title | Movies(t, 'Spielberg')}", Syntax::Friendly, &span), Errc::ElisionAmbiguity);
    EXPECT_TRUE(span.has_value());
}

TEST(Parser, Errors) {
    std::optional<SourceSpan> span;
    EXPECT_EQ(parse_error("lambda t (Movies(t", Syntax::Raw, &span), Errc::Syntax);
    EXPECT_TRUE(span.has_value());
    EXPECT_EQ(parse_error("lambda t (Nope(t))", Syntax::Raw, &span), Errc::UnknownAttribute);
    ASSERT_TRUE(span.has_value());
    EXPECT_EQ(span->start, 10u);
    EXPECT_EQ(parse_error("lambda t (exists x t = t)", Syntax::Raw), Errc::AmbiguousVariable);
    EXPECT_EQ(parse_error("{t^Title | t = 'a' | x}", Syntax::Friendly), Errc::Syntax);
}
