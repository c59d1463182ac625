#include <gtest/gtest.h>

#include "support.hpp"

using namespace matloop;
namespace ts = testing_support;

namespace {

template <class S>
KRelation<S> relation(AttrSet attrs, std::vector<std::pair<std::vector<long>, typename S::value_type>> rows) {
    KRelation<S> r(std::move(attrs));
    for (auto& [t, v] : rows) r.set(t, v);
    return r;
}

ErrorKind kind_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.kind();
    }
    ADD_FAILURE() << "no error raised";
    return ErrorKind::FormatError;
}

}  // namespace

TEST(KRelation, SupportDropsZeros) {
    KRelation<NatSemiring> r(AttrSet{"a"});
    r.set({1}, 0);
    EXPECT_EQ(r.size(), 0u);
    r.set({1}, 2);
    r.set({1}, 0);
    EXPECT_EQ(r.size(), 0u);
    EXPECT_EQ(kind_of([&] { r.set({1, 2}, 1); }), ErrorKind::SignatureViolation);
    EXPECT_EQ(kind_of([&] { r.set({0}, 1); }), ErrorKind::SignatureViolation);
}

TEST(EvalRA, Union) {
    RelInstance<NatSemiring> inst;
    inst["r1"] = relation<NatSemiring>({"a"}, {{{1}, 2}});
    inst["r2"] = relation<NatSemiring>({"a"}, {{{1}, 3}});
    auto out = eval_ra(ra::union_(ra::rel("r1"), ra::rel("r2")), inst);
    EXPECT_EQ(out.get(std::vector<long>{1}), 5);
    EXPECT_EQ(out.size(), 1u);
}

TEST(EvalRA, ProjectToNothing) {
    RelInstance<NatSemiring> inst;
    inst["r"] = relation<NatSemiring>({"a", "b"}, {{{1, 1}, 2}, {{1, 2}, 3}});
    auto out = eval_ra(ra::project({}, ra::rel("r")), inst);
    EXPECT_TRUE(out.attrs().empty());
    EXPECT_EQ(out.get(std::vector<long>{}), 5);
}

TEST(EvalRA, Select) {
    RelInstance<NatSemiring> inst;
    inst["r"] = relation<NatSemiring>({"a", "b"}, {{{1, 1}, 4}, {{1, 2}, 7}});
    auto out = eval_ra(ra::select({"a", "b"}, ra::rel("r")), inst);
    EXPECT_EQ(out.size(), 1u);
    EXPECT_EQ(out.get(std::vector<long>{1, 1}), 4);
}

TEST(EvalRA, RenameAndJoin) {
    RelInstance<NatSemiring> inst;
    inst["E"] = relation<NatSemiring>({"a", "b"}, {{{1, 2}, 2}, {{2, 3}, 3}, {{2, 4}, 1}});
    // paths of length two: E(a,b) join E(b,c)
    auto q = ra::join(ra::rel("E"), ra::rename({{"a", "b"}, {"b", "c"}}, ra::rel("E")));
    auto out = eval_ra(q, inst);
    EXPECT_EQ(out.attrs(), (std::vector<std::string>{"a", "b", "c"}));
    EXPECT_EQ(out.get(std::vector<long>{1, 2, 3}), 6);
    EXPECT_EQ(out.get(std::vector<long>{1, 2, 4}), 2);
    EXPECT_EQ(out.size(), 2u);
}

TEST(EvalRA, TropicalZerosDropped) {
    RelInstance<TropicalSemiring> inst;
    inst["r"] = relation<TropicalSemiring>({"a"}, {{{1}, 3.0}, {{2}, 1.0}});
    auto out = eval_ra(ra::project({}, ra::rel("r")), inst);
    EXPECT_EQ(out.get(std::vector<long>{}), 1.0);
}

TEST(EvalRA, SignatureErrors) {
    RelSchema rs = {{"R", {"a", "b"}}, {"S", {"a"}}};
    EXPECT_EQ(kind_of([&] { ra_signature(ra::rel("T"), rs); }), ErrorKind::UnknownRelation);
    EXPECT_EQ(kind_of([&] { ra_signature(ra::union_(ra::rel("R"), ra::rel("S")), rs); }), ErrorKind::SignatureViolation);
    EXPECT_EQ(kind_of([&] { ra_signature(ra::project({"c"}, ra::rel("R")), rs); }), ErrorKind::SignatureViolation);
    EXPECT_EQ(kind_of([&] { ra_signature(ra::select({"a", "c"}, ra::rel("R")), rs); }), ErrorKind::SignatureViolation);
    EXPECT_EQ(kind_of([&] { ra_signature(ra::rename({{"a", "b"}}, ra::rel("R")), rs); }), ErrorKind::SignatureViolation);
    EXPECT_EQ(kind_of([&] { ra_signature(ra::rename({{"c", "d"}}, ra::rel("R")), rs); }), ErrorKind::SignatureViolation);
    EXPECT_EQ(ra_signature(ra::rename({{"a", "b"}, {"b", "a"}}, ra::rel("R")), rs), (AttrSet{"a", "b"}));
    EXPECT_EQ(ra_signature(ra::join(ra::rel("R"), ra::rename({{"a", "c"}}, ra::rel("S"))), rs), (AttrSet{"a", "b", "c"}));
}

TEST(EvalRA, BooleanMatchesSetSemantics) {
    ts::Rng rng(59);
    using Set = std::set<std::vector<long>>;
    for (int k = 0; k < 50; ++k) {
        RelInstance<BoolSemiring> inst;
        Set e_set;
        KRelation<BoolSemiring> e(AttrSet{"a", "b"});
        for (int i = 0; i < 8; ++i) {
            std::vector<long> t = {static_cast<long>(1 + rng() % 4), static_cast<long>(1 + rng() % 4)};
            e.set(t, 1);
            e_set.insert(t);
        }
        inst["E"] = e;
        // pairs (a, c) with a path a -> b -> c, or a direct edge
        auto q = ra::union_(
            ra::rename({{"c", "b"}},
                       ra::project({"a", "c"}, ra::join(ra::rel("E"), ra::rename({{"a", "b"}, {"b", "c"}}, ra::rel("E"))))),
            ra::rel("E"));
        auto out = eval_ra(q, inst);
        Set expect = e_set;
        for (const auto& x : e_set)
            for (const auto& y : e_set)
                if (x[1] == y[0]) expect.insert({x[0], y[1]});
        Set got;
        for (const auto& [t, v] : out.support()) {
            EXPECT_EQ(v, 1);
            got.insert(t);
        }
        EXPECT_EQ(got, expect);
        auto adom = active_domain(inst);
        for (const auto& t : got)
            for (long x : t) EXPECT_TRUE(adom.count(x));
    }
}

TEST(RAText, ParsePrintRoundTrip) {
    for (const char* text : {"rel E", "union(rel E, rel F)", "project[a](rel E)", "project[](rel E)",
                             "select[a,b](join(rel E, rename[a->b,b->c](rel E)))"}) {
        RAExpr q = parse_ra(text);
        EXPECT_EQ(print_ra(q), text);
        EXPECT_TRUE(ra_equal(parse_ra(print_ra(q)), q));
    }
    EXPECT_EQ(kind_of([] { parse_ra("join(rel E"); }), ErrorKind::SyntaxError);
    EXPECT_EQ(kind_of([] { parse_ra("rename[a](rel E)"); }), ErrorKind::SyntaxError);
}

TEST(RelationsText, ParseAndWrite) {
    RawRelations raw = parse_relations_text("semiring nat\nrelation E b a\n1 2 : 3\n2 2 : 0\nrelation S\n: 4\n");
    EXPECT_EQ(raw.semiring, SemiringKind::Nat);
    auto inst = materialize<NatSemiring>(raw);
    // values are listed in header order and stored in sorted attribute order
    EXPECT_EQ(inst.at("E").get(std::map<std::string, long>{{"a", 2}, {"b", 1}}), 3);
    EXPECT_EQ(inst.at("E").size(), 1u);
    EXPECT_EQ(inst.at("S").get(std::vector<long>{}), 4);
    auto back = materialize<NatSemiring>(parse_relations_text(write_relations(inst)));
    EXPECT_TRUE(back == inst);
}

TEST(RelationsText, Errors) {
    for (const char* bad : {"1 2 : 3\n", "relation E a b\n1 : 3\n", "relation E a\n0 : 1\n", "relation E a\n1 3\n",
                            "relation E a a\n", "relation E a\nrelation E b\n"}) {
        try {
            parse_relations_text(bad);
            ADD_FAILURE() << bad;
        } catch (const FormatError& e) {
            EXPECT_GE(e.line(), 1u);
        }
    }
    try {
        materialize<BoolSemiring>(parse_relations_text("relation E a\n1 : 1\n2 : 5\n"));
        FAIL();
    } catch (const FormatError& e) {
        EXPECT_EQ(e.line(), 3u);
    }
}

// encodings

TEST(RelEncode, MatrixAndDomain) {
    Schema s = parse_schema("var V : alpha x beta\n");
    Instance<NatSemiring> inst;
    inst.set_dim("alpha", 2);
    inst.set_dim("beta", 2);
    inst.set("V", KMatrix<NatSemiring>(2, 2, {0, 5, 7, 0}));
    auto [rs, rel] = rel_encode(s, inst);
    EXPECT_EQ(rs.at("R_V"), (AttrSet{"row_alpha", "col_beta"}));
    EXPECT_EQ(rs.at("R_alpha"), (AttrSet{"alpha"}));
    const auto& r = rel.at("R_V");
    EXPECT_EQ(r.size(), 2u);
    EXPECT_EQ(r.get(std::map<std::string, long>{{"row_alpha", 1}, {"col_beta", 2}}), 5);
    EXPECT_EQ(r.get(std::map<std::string, long>{{"row_alpha", 2}, {"col_beta", 1}}), 7);
    EXPECT_EQ(rel.at("R_alpha").size(), 2u);
    EXPECT_EQ(rel.at("R_alpha").get(std::vector<long>{2}), 1);
}

TEST(RelEncode, ScalarAndZero) {
    Schema s = parse_schema("var c : 1 x 1\nvar Z : alpha x alpha\n");
    Instance<NatSemiring> inst;
    inst.set_dim("alpha", 3);
    inst.set("c", KMatrix<NatSemiring>::scalar(3));
    inst.set("Z", KMatrix<NatSemiring>(3, 3, 0));
    auto [rs, rel] = rel_encode(s, inst);
    EXPECT_TRUE(rs.at("R_c").empty());
    EXPECT_EQ(rel.at("R_c").get(std::vector<long>{}), 3);
    EXPECT_EQ(rel.at("R_Z").size(), 0u);
    EXPECT_EQ(rel.at("R_alpha").size(), 3u);
}

TEST(RelEncode, NameClash) {
    Schema s = parse_schema("var alpha : alpha x 1\n");
    EXPECT_EQ(kind_of([&] { rel_schema(s); }), ErrorKind::SignatureViolation);
}

TEST(MatEncode, Binary) {
    RelSchema rs = {{"R", {"a", "b"}}};
    RelInstance<NatSemiring> j;
    j["R"] = relation<NatSemiring>({"a", "b"}, {{{3, 7}, 2}});
    auto enc = mat_encode(rs, j);
    EXPECT_EQ(enc.adom, (std::vector<long>{3, 7}));
    EXPECT_EQ(enc.schema.at("V_R"), make_type("alpha", "alpha"));
    EXPECT_TRUE(mat_equal(enc.instance.at("V_R"), KMatrix<NatSemiring>(2, 2, {0, 2, 0, 0})));
}

TEST(MatEncode, UnaryNullaryAndErrors) {
    RelSchema rs = {{"U", {"a"}}, {"C", {}}};
    RelInstance<NatSemiring> j;
    j["U"] = relation<NatSemiring>({"a"}, {{{5}, 4}});
    j["C"] = relation<NatSemiring>({}, {{{}, 9}});
    auto enc = mat_encode(rs, j);
    EXPECT_EQ(enc.schema.at("V_U"), make_type("alpha", "1"));
    EXPECT_EQ(enc.schema.at("V_C"), make_type("1", "1"));
    EXPECT_TRUE(mat_equal(enc.instance.at("V_U"), KMatrix<NatSemiring>(1, 1, 4)));
    EXPECT_EQ(enc.instance.at("V_C")(0, 0), 9);
    RelInstance<NatSemiring> empty;
    empty["U"] = KRelation<NatSemiring>(AttrSet{"a"});
    EXPECT_EQ(kind_of([&] { mat_encode(RelSchema{{"U", {"a"}}}, empty); }), ErrorKind::EmptyActiveDomain);
    EXPECT_EQ(kind_of([&] { mat_encode(RelSchema{{"T", {"a", "b", "c"}}}, RelInstance<NatSemiring>{}); }),
              ErrorKind::SchemaNotBinary);
}

// translations

namespace {

template <class S>
void check_phi(const Expr& e, const Schema& s, const Instance<S>& inst) {
    RAExpr q = phi_translate(e, s);
    auto [rs, rel] = rel_encode(s, inst);
    auto direct = evaluate(e, s, inst, S{});
    auto via = eval_ra(q, rel);
    MatrixType t = typecheck(e, s);
    for (std::size_t i = 0; i < direct.rows(); ++i)
        for (std::size_t j = 0; j < direct.cols(); ++j) {
            std::map<std::string, long> tup;
            if (!t.rows.is_unit()) tup[row_attr(t.rows)] = static_cast<long>(i + 1);
            if (!t.cols.is_unit()) tup[col_attr(t.cols)] = static_cast<long>(j + 1);
            EXPECT_TRUE(S{}.equal(direct(i, j), via.get(tup))) << pretty(e) << " at " << i << "," << j;
        }
}

}  // namespace

TEST(Phi, VariableEntry) {
    Schema s = parse_schema("var V : alpha x beta\n");
    Instance<NatSemiring> inst;
    inst.set_dim("alpha", 2);
    inst.set_dim("beta", 2);
    inst.set("V", KMatrix<NatSemiring>(2, 2, {0, 5, 7, 0}));
    RAExpr q = phi_translate(parse_expr("V"), s);
    auto [rs, rel] = rel_encode(s, inst);
    EXPECT_EQ(ra_signature(q, rs), (AttrSet{"row_alpha", "col_beta"}));
    EXPECT_EQ(eval_ra(q, rel).get(std::map<std::string, long>{{"row_alpha", 1}, {"col_beta", 2}}), 5);
}

TEST(Phi, CorpusOnRandomNaturals) {
    ts::Rng rng(61);
    for (const auto& item : ts::generic_sum_corpus())
        for (int k = 0; k < 3; ++k) {
            std::size_t n = 1 + rng() % 4;
            auto inst = ts::random_instance<NatSemiring>(rng, item.expr, item.schema, ts::uniform_dims(item.schema, n));
            check_phi(item.expr, item.schema, inst);
        }
}

TEST(Phi, LooplessFourClique) {
    lib::Builder b("alpha");
    Expr e = b.four_clique(b.matrix_input("V"), false);
    Schema s = b.schema();
    ts::Rng rng(67);
    for (int k = 0; k < 3; ++k) {
        auto inst = ts::random_instance<NatSemiring>(rng, e, s, ts::uniform_dims(s, 3));
        check_phi(e, s, inst);
    }
}

TEST(Phi, Errors) {
    Schema s = ts::corpus_schema();
    EXPECT_EQ(kind_of([&] { phi_translate(parse_expr("prod v . V"), s); }), ErrorKind::NotInSumFragment);
    EXPECT_EQ(kind_of([&] { phi_translate(parse_expr("for v, X . X * V"), s); }), ErrorKind::NotInSumFragment);
    EXPECT_EQ(kind_of([&] { phi_translate(parse_expr("div(V, W)"), s); }), ErrorKind::UnsupportedFunction);
    EXPECT_EQ(kind_of([&] { phi_translate(parse_expr("[2] .* V"), s); }), ErrorKind::UnsupportedConstruct);
}

TEST(Psi, BaseCase) {
    RelSchema rs = {{"R", {"a", "b"}}};
    Schema out;
    Expr e = psi_translate(ra::rel("R"), rs, out);
    RelInstance<NatSemiring> j;
    j["R"] = relation<NatSemiring>({"a", "b"}, {{{1, 4}, 3}, {{4, 4}, 2}});
    auto enc = mat_encode(rs, j);
    auto m = evaluate(e, out, enc.instance);
    EXPECT_TRUE(mat_equal(m, enc.instance.at("V_R")));
    EXPECT_EQ(m(0, 1), 3);
    EXPECT_EQ(classify(e, &out), Fragment::Sum);
}

TEST(Psi, AggregateAndSelection) {
    RelSchema rs = {{"R", {"a", "b"}}};
    RelInstance<NatSemiring> j;
    j["R"] = relation<NatSemiring>({"a", "b"}, {{{1, 2}, 3}, {{2, 2}, 5}, {{3, 1}, 1}});
    auto enc = mat_encode(rs, j);
    Schema out;
    Expr agg = psi_translate(ra::project({}, ra::rel("R")), rs, out);
    EXPECT_EQ(evaluate(agg, out, enc.instance)(0, 0), 9);
    Expr sel = psi_translate(ra::select({"a", "b"}, ra::rel("R")), rs, out);
    auto m = evaluate(sel, out, enc.instance);
    EXPECT_TRUE(mat_equal(m, KMatrix<NatSemiring>(3, 3, {0, 0, 0, 0, 5, 0, 0, 0, 0})));
}

TEST(Psi, Errors) {
    RelSchema rs = {{"R", {"a", "b"}}};
    Schema out;
    EXPECT_EQ(kind_of([&] { psi_translate(ra::join(ra::rel("R"), ra::rename({{"a", "b"}, {"b", "c"}}, ra::rel("R"))), rs, out); }),
              ErrorKind::OutputArityTooLarge);
    EXPECT_EQ(kind_of([&] { psi_translate(ra::rel("T"), RelSchema{{"T", {"a", "b", "c"}}}, out); }),
              ErrorKind::SchemaNotBinary);
}
