#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "iatsf/adam.hpp"
#include "iatsf/ops.hpp"
#include "iatsf/tensor.hpp"
#include "test_util.hpp"

using namespace iatsf;

TEST_CASE("matmul identity and hand arithmetic") {
    Tensor I2 = Tensor::from_data({2, 2}, {1, 0, 0, 1});
    Tensor a = Tensor::from_data({2, 2}, {1, 2, 3, 4});
    Tensor r = matmul(I2, a);
    CHECK(r.vec() == std::vector<double>{1, 2, 3, 4});

    Tensor b = Tensor::from_data({2, 1}, {5, 6});
    Tensor r2 = matmul(a, b);
    CHECK(r2(0, 0) == doctest::Approx(17));
    CHECK(r2(1, 0) == doctest::Approx(39));
}

TEST_CASE("matmul shape mismatch throws") {
    Tensor a = Tensor::from_data({2, 3}, {1, 2, 3, 4, 5, 6});
    Tensor b = Tensor::from_data({2, 2}, {1, 2, 3, 4});
    CHECK_THROWS_AS(matmul(a, b), DimensionError);
}

TEST_CASE("matmul gradient: d sum(a*b) / d a = 1 * b^T") {
    Tensor a = Tensor::from_data({2, 2}, {1, 2, 3, 4}, true);
    Tensor b = Tensor::from_data({2, 1}, {5, 6});
    Graph g;
    Tensor loss = sum(matmul(a, b));
    g.backward(loss);
    const auto& ga = a.grad();
    CHECK(ga[0] == doctest::Approx(5));
    CHECK(ga[1] == doctest::Approx(6));
    CHECK(ga[2] == doctest::Approx(5));
    CHECK(ga[3] == doctest::Approx(6));
}

TEST_CASE("softmax symmetry, stability, normalization") {
    Tensor x = Tensor::from_data({3}, {0, 0, 0});
    Tensor y = softmax(x);
    for (size_t i = 0; i < 3; ++i) CHECK(y.at(i) == doctest::Approx(1.0 / 3));

    Tensor big = Tensor::from_data({2}, {1000, 0});
    Tensor yb = softmax(big);
    CHECK(std::isfinite(yb.at(0)));
    CHECK(yb.at(0) == doctest::Approx(1.0));
    CHECK(yb.at(1) == doctest::Approx(0.0));

    Rng rng(3);
    Tensor r = Tensor::rand_uniform({4, 6}, rng, 3.0);
    Tensor yr = softmax(r);
    for (size_t i = 0; i < 4; ++i) {
        double s = 0.0;
        for (size_t j = 0; j < 6; ++j) {
            CHECK(yr(i, j) >= 0.0);
            s += yr(i, j);
        }
        CHECK(std::fabs(s - 1.0) <= 1e-12);
    }
}

TEST_CASE("layer_norm standardizes rows") {
    Tensor gain = Tensor::full({2}, 1.0);
    Tensor bias = Tensor::zeros({2});

    Tensor c = Tensor::from_data({1, 2}, {4, 4});
    Tensor yc = layer_norm(c, gain, bias);
    CHECK(yc.at(0) == doctest::Approx(0.0));
    CHECK(yc.at(1) == doctest::Approx(0.0));

    Tensor two = Tensor::from_data({1, 2}, {1, 3});
    Tensor yt = layer_norm(two, gain, bias, 1e-12);
    CHECK(yt.at(0) == doctest::Approx(-1.0).epsilon(1e-5));
    CHECK(yt.at(1) == doctest::Approx(1.0).epsilon(1e-5));

    Rng rng(11);
    Tensor gain8 = Tensor::full({8}, 1.0);
    Tensor bias8 = Tensor::zeros({8});
    Tensor r = Tensor::rand_uniform({1, 8}, rng, 5.0);
    Tensor yr = layer_norm(r, gain8, bias8, 1e-10);
    double m = 0.0, v = 0.0;
    for (size_t j = 0; j < 8; ++j) m += yr.at(j);
    m /= 8;
    for (size_t j = 0; j < 8; ++j) v += (yr.at(j) - m) * (yr.at(j) - m);
    v /= 8;
    CHECK(std::fabs(m) < 1e-10);
    CHECK(v == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("masked_fill semantics") {
    Tensor scores = Tensor::from_data({1, 2}, {1, 1});
    Tensor mask = Tensor::from_data({1, 2}, {0, 1});
    Tensor filled = masked_fill(scores, mask, kMaskValue);
    Tensor w = softmax(filled);
    CHECK(w.at(0) == doctest::Approx(1.0));
    CHECK(w.at(1) == 0.0);

    Tensor none = Tensor::from_data({1, 2}, {0, 0});
    Tensor same = masked_fill(scores, none, kMaskValue);
    CHECK(same.vec() == scores.vec());

    Tensor all = Tensor::from_data({1, 2}, {1, 1});
    CHECK_THROWS_AS(masked_softmax(scores, all), ValidationError);
}

TEST_CASE("mse_loss values and gradient") {
    Tensor p = Tensor::from_data({2}, {0, 0});
    Tensor t = Tensor::from_data({2}, {1, 1});
    CHECK(mse_loss(p, t).item() == doctest::Approx(1.0));
    CHECK(mse_loss(t, t).item() == doctest::Approx(0.0));

    Tensor p1 = Tensor::from_data({1}, {2}, true);
    Tensor t1 = Tensor::from_data({1}, {0});
    Graph g;
    Tensor loss = mse_loss(p1, t1);
    g.backward(loss);
    CHECK(p1.grad()[0] == doctest::Approx(4.0));
}

TEST_CASE("backward: x squared at 3 gives 6") {
    Tensor x = Tensor::from_data({1}, {3}, true);
    Graph g;
    Tensor loss = mul(x, x);
    g.backward(loss);
    CHECK(x.grad()[0] == doctest::Approx(6.0));
}

TEST_CASE("backward: sum of softmax is constant, gradient vanishes") {
    Tensor x = Tensor::from_data({4}, {0.3, -1.2, 2.0, 0.1}, true);
    Graph g;
    Tensor loss = sum(softmax(x));
    g.backward(loss);
    for (double v : x.grad()) CHECK(std::fabs(v) < 1e-12);
}

TEST_CASE("backward errors: non-scalar loss, dead graph, foreign loss") {
    Tensor x = Tensor::from_data({2}, {1, 2}, true);
    {
        Graph g;
        Tensor y = mul(x, x);
        CHECK_THROWS_AS(g.backward(y), DimensionError);
        Tensor loss = sum(y);
        g.backward(loss);
        CHECK_THROWS_AS(g.backward(loss), ValidationError);
    }
    {
        Graph g;
        Tensor leaf = Tensor::scalar(1.0, true);
        CHECK_THROWS_AS(g.backward(leaf), ValidationError);
    }
}

// [DERIVED] oracle: central finite differences at step 1e-5 on a random
// three-layer composite.
TEST_CASE("gradient check: random composite vs finite differences") {
    Rng rng(42);
    Tensor w1 = Tensor::rand_uniform({3, 5}, rng, 0.8, true);
    Tensor w2 = Tensor::rand_uniform({5, 4}, rng, 0.8, true);
    Tensor gain = Tensor::rand_uniform({4}, rng, 0.5, true);
    Tensor bias = Tensor::rand_uniform({4}, rng, 0.5, true);
    Tensor x = Tensor::rand_uniform({2, 3}, rng, 1.0, true);

    auto forward = [&]() {
        Tensor h = gelu(matmul(x, w1));
        Tensor o = layer_norm(matmul(h, w2), gain, bias, 1e-5);
        return mse_loss(softmax(o), Tensor::zeros({2, 4})).item();
    };
    {
        Graph g;
        Tensor h = gelu(matmul(x, w1));
        Tensor o = layer_norm(matmul(h, w2), gain, bias, 1e-5);
        Tensor loss = mse_loss(softmax(o), Tensor::zeros({2, 4}));
        g.backward(loss);
    }
    double err = testutil::max_grad_rel_err(forward, {x, w1, w2, gain, bias});
    CHECK(err <= 1e-4);
}

TEST_CASE("gradient check: every primitive") {
    Rng rng(7);
    SUBCASE("transpose, add, sub, mul, scale, add_rowvec, concat, slice") {
        Tensor a = Tensor::rand_uniform({3, 4}, rng, 1.0, true);
        Tensor b = Tensor::rand_uniform({3, 4}, rng, 1.0, true);
        Tensor v = Tensor::rand_uniform({4}, rng, 1.0, true);
        Tensor w = Tensor::rand_uniform({5}, rng, 1.0);  // fixed mixing weights
        auto build = [&]() {
            Tensor t = transpose(add(mul(a, b), sub(a, scale(b, 0.7))));
            Tensor c = concat_rows(slice_rows(transpose(t), 1, 3), add_rowvec(a, v));
            Tensor s = concat_cols({slice_cols(c, 0, 2), slice_cols(c, 2, 4)});
            Tensor flat = Tensor::from_data({1, 5}, std::vector<double>(w.vec()));
            return mse_loss(matmul(flat, s), Tensor::zeros({1, 4}));
        };
        auto forward = [&]() { return build().item(); };
        {
            Graph g;
            Tensor loss = build();
            g.backward(loss);
        }
        CHECK(testutil::max_grad_rel_err(forward, {a, b, v}) <= 1e-4);
    }
    SUBCASE("masked_softmax") {
        Tensor s = Tensor::rand_uniform({2, 5}, rng, 1.5, true);
        Tensor m = Tensor::from_data({2, 5}, {0, 1, 0, 0, 1, 0, 0, 0, 1, 0});
        Tensor tgt = Tensor::rand_uniform({2, 5}, rng, 1.0);
        auto forward = [&]() { return mse_loss(masked_softmax(s, m), tgt).item(); };
        {
            Graph g;
            Tensor loss = mse_loss(masked_softmax(s, m), tgt);
            g.backward(loss);
        }
        CHECK(testutil::max_grad_rel_err(forward, {s}) <= 1e-4);
    }
    SUBCASE("gelu") {
        Tensor x = Tensor::rand_uniform({2, 3}, rng, 2.0, true);
        Tensor tgt = Tensor::rand_uniform({2, 3}, rng, 1.0);
        auto forward = [&]() { return mse_loss(gelu(x), tgt).item(); };
        {
            Graph g;
            g.backward(mse_loss(gelu(x), tgt));
        }
        CHECK(testutil::max_grad_rel_err(forward, {x}) <= 1e-4);
    }
}

TEST_CASE("adam: zero gradient leaves params unchanged") {
    std::vector<Tensor> params = {Tensor::from_data({3}, {1, 2, 3}, true)};
    params[0].grad_buffer();  // zeros
    AdamState state(params, {});
    adam_step(params, state);
    CHECK(params[0].vec() == std::vector<double>{1, 2, 3});
    CHECK(state.step_count() == 1);
}

TEST_CASE("adam: first step has magnitude ~ lr * sign(g)") {
    std::vector<Tensor> params = {Tensor::from_data({2}, {0.5, -0.5}, true)};
    params[0].grad_buffer() = {3.0, -0.002};
    AdamConfig cfg;
    cfg.lr = 0.01;
    AdamState state(params, cfg);
    adam_step(params, state);
    CHECK(params[0].at(0) == doctest::Approx(0.5 - 0.01).epsilon(1e-4));
    CHECK(params[0].at(1) == doctest::Approx(-0.5 + 0.01).epsilon(1e-3));
}

TEST_CASE("adam: identical seeded runs are bitwise identical") {
    auto run = [](uint64_t seed) {
        Rng rng(seed);
        std::vector<Tensor> params = {Tensor::rand_uniform({4, 4}, rng, 0.5, true)};
        AdamState state(params, {});
        Tensor x = Tensor::rand_uniform({2, 4}, rng, 1.0);
        Tensor target = Tensor::rand_uniform({2, 4}, rng, 1.0);
        for (int it = 0; it < 25; ++it) {
            params[0].zero_grad();
            Graph g;
            Tensor loss = mse_loss(matmul(x, params[0]), target);
            g.backward(loss);
            adam_step(params, state);
        }
        return params[0].vec();
    };
    std::vector<double> a = run(123), b = run(123);
    CHECK(a == b);  // exact, bitwise
}

TEST_CASE("debug verification mode flags non-finite values") {
    set_debug_checks(true);
    Tensor x = Tensor::from_data({2}, {1e308, 1e308});
    CHECK_THROWS_AS(add(x, x), ValidationError);
    set_debug_checks(false);
}

TEST_CASE("rng determinism and split independence") {
    Rng a(99), b(99);
    for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
    Rng base(5);
    Rng s1 = base.split(1), s2 = base.split(2);
    CHECK(s1.next_u64() != s2.next_u64());
    // split is a function of the initial seed, not of consumption
    Rng consumed(5);
    consumed.next_u64();
    CHECK(consumed.split(1).next_u64() == base.split(1).next_u64());
}
