#include <gtest/gtest.h>

#include "support.hpp"

using namespace matloop;
using namespace matloop::ex;
namespace ts = testing_support;

namespace {

Schema vec_schema() {
    return parse_schema(
        "var v : alpha x 1\n"
        "var X : alpha x 1\n"
        "var V : alpha x beta\n"
        "var W : alpha x beta\n"
        "var S : alpha x alpha\n"
        "var a : alpha x 1\n"
        "var s : 1 x 1\n"
        "var t : 1 x 1\n");
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

TEST(Typecheck, OneVectorLoop) {
    Schema s = vec_schema();
    EXPECT_EQ(typecheck(loop("v", "X", var("X") + var("v")), s), make_type("alpha", "1"));
}

TEST(Typecheck, InnerSymbolsDiffer) {
    Schema s = vec_schema();
    EXPECT_EQ(kind_of([&] { typecheck(var("V") * var("W"), s); }), ErrorKind::TypeMismatch);
}

TEST(Typecheck, SumOfOuterProducts) {
    Schema s = vec_schema();
    EXPECT_EQ(typecheck(sum("v", var("v") * tr(var("v"))), s), make_type("alpha", "alpha"));
}

TEST(Typecheck, Errors) {
    Schema s = vec_schema();
    EXPECT_EQ(kind_of([&] { typecheck(var("nope"), s); }), ErrorKind::UnboundVariable);
    EXPECT_EQ(kind_of([&] { typecheck(sum("s", var("s")), s); }), ErrorKind::IteratorNotVector);
    EXPECT_EQ(kind_of([&] { typecheck(apply("div", {var("s")}), s); }), ErrorKind::ArityMismatch);
    EXPECT_EQ(kind_of([&] { typecheck(apply("hprod2", {var("s"), var("v")}), s); }), ErrorKind::TypeMismatch);
    EXPECT_EQ(kind_of([&] { typecheck(smul(var("v"), var("v")), s); }), ErrorKind::TypeMismatch);
    EXPECT_EQ(kind_of([&] { typecheck(loop("v", "X", var("S")), s); }), ErrorKind::TypeMismatch);
    EXPECT_EQ(kind_of([&] { typecheck(loop("v", "X", var("V"), var("X")), s); }), ErrorKind::TypeMismatch);
    EXPECT_EQ(kind_of([&] { typecheck(diag(var("V")), s); }), ErrorKind::TypeMismatch);
    EXPECT_EQ(kind_of([&] { typecheck(prod("v", var("V")), s); }), ErrorKind::TypeMismatch);
}

TEST(Typecheck, MismatchNamesBothTypes) {
    Schema s = vec_schema();
    try {
        typecheck(var("V") + var("S"), s);
        FAIL();
    } catch (const Error& e) {
        std::string m = e.what();
        EXPECT_NE(m.find("alpha x beta"), std::string::npos);
        EXPECT_NE(m.find("alpha x alpha"), std::string::npos);
    }
}

TEST(Typecheck, Sugar) {
    Schema s = vec_schema();
    EXPECT_EQ(typecheck(ones(var("V")), s), make_type("alpha", "1"));
    EXPECT_EQ(typecheck(diag(var("a")), s), make_type("alpha", "alpha"));
    EXPECT_EQ(typecheck(hprod("v", var("V")), s), make_type("alpha", "beta"));
    EXPECT_EQ(typecheck(order(OrderKind::Sless, "alpha"), s), make_type("alpha", "alpha"));
    EXPECT_EQ(typecheck(order(OrderKind::Emin, "beta"), s), make_type("beta", "1"));
    EXPECT_EQ(typecheck(order(OrderKind::Emax, "beta"), s), make_type("beta", "1"));
    EXPECT_EQ(typecheck(order(OrderKind::Nshift, "alpha"), s), make_type("alpha", "alpha"));
    EXPECT_EQ(typecheck(constant("2"), s), make_type("1", "1"));
    EXPECT_EQ(typecheck(tr(var("V")), s), make_type("beta", "alpha"));
}

TEST(Typecheck, UnknownFunctionsTypecheck) {
    Schema s = vec_schema();
    EXPECT_EQ(typecheck(apply("f", {var("V"), var("W")}), s), make_type("alpha", "beta"));
}

TEST(FreeVars, Basics) {
    EXPECT_EQ(free_vars(var("V")), (std::set<std::string>{"V"}));
    EXPECT_EQ(free_vars(loop("v", "X", var("X") + var("v") * var("W"))), (std::set<std::string>{"W"}));
    EXPECT_TRUE(free_vars(sum("v", var("v"))).empty());
    EXPECT_EQ(free_vars(loop("v", "X", var("X"), var("X"))), (std::set<std::string>{"X"}));
    EXPECT_EQ(free_vars(var("v") + sum("v", var("v"))), (std::set<std::string>{"v"}));
}

namespace {

bool core_only(const Expr& e) {
    bool ok = !e.is<QuantNode>() && !e.is<OnesNode>() && !e.is<DiagNode>();
    for_each_child(e, [&](const Expr& c) { ok = ok && core_only(c); });
    return ok;
}

bool scalar_applies(const Expr& e, const Schema& s) {
    bool ok = true;
    if (const auto* a = e.as<ApplyNode>())
        for (const auto& x : a->args) ok = ok && typecheck(x, s).is_scalar();
    for_each_child(e, [&](const Expr& c) { ok = ok && scalar_applies(c, s); });
    return ok;
}

}  // namespace

TEST(Desugar, SumBecomesLoop) {
    Schema s = vec_schema();
    Expr d = desugar(sum("v", var("v")), s);
    const ForNode* f = d.as<ForNode>();
    ASSERT_NE(f, nullptr);
    EXPECT_EQ(f->iter, "v");
    EXPECT_FALSE(f->init.has_value());
    const AddNode* add = f->body.as<AddNode>();
    ASSERT_NE(add, nullptr);
    EXPECT_TRUE(add->lhs == var(f->acc));
    EXPECT_TRUE(add->rhs == var("v"));
    EXPECT_FALSE(vec_schema().contains(f->acc));
    EXPECT_TRUE(s.contains(f->acc));
}

TEST(Desugar, DiagTemplate) {
    Schema s = vec_schema();
    Expr d = desugar(diag(var("a")), s);
    const ForNode* f = d.as<ForNode>();
    ASSERT_NE(f, nullptr);
    Expr v = var(f->iter);
    Expr expected = var(f->acc) + smul(tr(v) * var("a"), v * tr(v));
    EXPECT_TRUE(f->body == expected) << pretty(f->body);
}

TEST(Desugar, ProdTemplate) {
    Schema s = vec_schema();
    Expr d = desugar(prod("v", var("S")), s);
    const ForNode* f = d.as<ForNode>();
    ASSERT_NE(f, nullptr);
    ASSERT_TRUE(f->init.has_value());
    EXPECT_TRUE(f->body == var(f->acc) * var("S"));
    EXPECT_EQ(typecheck(*f->init, s), make_type("alpha", "alpha"));
    EXPECT_TRUE(core_only(d));
}

TEST(Desugar, FreshNamesAvoidSchema) {
    Schema s = vec_schema();
    s.add("X1", make_type("alpha", "alpha"));
    s.add("X2", make_type("alpha", "alpha"));
    Expr d = desugar(sum("v", var("v") * tr(var("v"))), s);
    const ForNode* f = d.as<ForNode>();
    ASSERT_NE(f, nullptr);
    EXPECT_NE(f->acc, "X1");
    EXPECT_NE(f->acc, "X2");
    EXPECT_EQ(s.at(f->acc), make_type("alpha", "alpha"));
}

TEST(Desugar, RandomCorpusCoreTypedIdempotent) {
    ts::Rng rng(7);
    ts::ExprGen gen(rng);
    int checked = 0;
    for (int k = 0; k < 200; ++k) {
        Schema s = ts::generator_schema();
        Expr e = gen.gen_any(4);
        MatrixType t = typecheck(e, s);
        Expr d = desugar(e, s);
        EXPECT_TRUE(core_only(d)) << pretty(e);
        EXPECT_EQ(typecheck(d, s), t);
        EXPECT_TRUE(desugar(d, s) == d);
        Expr r = reduce_apply_to_scalars(e, s);
        EXPECT_TRUE(scalar_applies(r, s)) << pretty(e);
        EXPECT_EQ(typecheck(r, s), t);
        EXPECT_TRUE(reduce_apply_to_scalars(r, s) == r);
        ++checked;
    }
    EXPECT_EQ(checked, 200);
}

TEST(ReduceApply, ScalarUnchanged) {
    Schema s = vec_schema();
    Expr e = apply("gtz", {var("s")});
    EXPECT_TRUE(reduce_apply_to_scalars(e, s) == e);
}

TEST(ReduceApply, DivBecomesDoubleSum) {
    Schema s = vec_schema();
    Expr e = apply("div", {var("S"), var("S")});
    Expr r = reduce_apply_to_scalars(e, s);
    const QuantNode* outer = r.as<QuantNode>();
    ASSERT_NE(outer, nullptr);
    EXPECT_EQ(outer->kind, Quantifier::Sum);
    const QuantNode* inner = outer->body.as<QuantNode>();
    ASSERT_NE(inner, nullptr);
    EXPECT_EQ(inner->kind, Quantifier::Sum);
    EXPECT_TRUE(scalar_applies(r, s));
}

TEST(ReduceApply, SameValueOnRandomReals) {
    ts::Rng rng(11);
    for (int k = 0; k < 10; ++k) {
        Schema s = vec_schema();
        Instance<RealSemiring> inst;
        inst.set_dim("alpha", 3);
        inst.set_dim("beta", 3);
        KMatrix<RealSemiring> a = ts::random_matrix<RealSemiring>(rng, 3, 3), b = ts::random_matrix<RealSemiring>(rng, 3, 3);
        for (auto& x : b.data()) x = x + 2.0;
        inst.set("V", a);
        inst.set("W", b);
        Expr e = apply("div", {var("V"), var("W")});
        Expr r = reduce_apply_to_scalars(e, s);
        EXPECT_TRUE(mat_equal(evaluate(e, s, inst), evaluate(r, s, inst), RealSemiring{}, 1e-12));
    }
}

TEST(Schema, MergeAndSymbols) {
    Schema s = vec_schema();
    EXPECT_EQ(s.symbols(), (std::set<SizeSymbol>{SizeSymbol("alpha"), SizeSymbol("beta")}));
    EXPECT_NO_THROW(s.merge("v", make_type("alpha", "1")));
    EXPECT_EQ(kind_of([&] { s.merge("v", make_type("beta", "1")); }), ErrorKind::DuplicateVariable);
    EXPECT_TRUE(SizeSymbol("1").is_unit());
    EXPECT_EQ(kind_of([] { SizeSymbol(""); }), ErrorKind::SyntaxError);
}
