#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <functional>

#include "doctest.h"
#include "fstnet/ops.hpp"
#include "test_util.hpp"

using namespace fstnet;

namespace {

using DVar = VarT<double>;

DVar dleaf(std::vector<int> dims, Rng& rng, double stddev = 1.0) {
    return make_var(testutil::random_tensor(std::move(dims), rng, stddev));
}

// Reduce an op output to a scalar with fixed random weights so every output
// element influences the loss.
TensorT<double> probe_weights(const std::vector<int>& dims, Rng& rng) {
    return testutil::random_tensor(dims, rng);
}

constexpr double kTol = 1e-3;

}  // namespace

TEST_CASE("conv2d gradients match finite differences") {
    Rng rng(100);
    auto x = dleaf({1, 2, 5, 5}, rng);
    auto w = dleaf({3, 2, 3, 3}, rng);
    const auto probe = probe_weights({1, 3, 5, 5}, rng);
    auto loss = [&] { return weighted_sum(conv2d(x, w, 1, 1), probe); };
    CHECK(testutil::max_grad_rel_error(loss, {x, w}) < kTol);
}

TEST_CASE("conv2d strided gradients match finite differences") {
    Rng rng(101);
    auto x = dleaf({1, 2, 6, 6}, rng);
    auto w = dleaf({2, 2, 3, 3}, rng);
    const auto probe = probe_weights({1, 2, 3, 3}, rng);
    auto loss = [&] { return weighted_sum(conv2d(x, w, 2, 1), probe); };
    CHECK(testutil::max_grad_rel_error(loss, {x, w}) < kTol);
}

TEST_CASE("depthwise_conv2d gradients match finite differences") {
    Rng rng(102);
    auto x = dleaf({1, 3, 8, 8}, rng);
    auto w = dleaf({3, 1, 5, 5}, rng);
    const auto probe = probe_weights({1, 3, 8, 8}, rng);
    auto loss = [&] { return weighted_sum(depthwise_conv2d(x, w, 1, 2), probe); };
    CHECK(testutil::max_grad_rel_error(loss, {x, w}) < kTol);
}

TEST_CASE("pointwise_conv2d gradients match finite differences") {
    Rng rng(103);
    auto x = dleaf({2, 3, 4, 4}, rng);
    auto w = dleaf({2, 3, 1, 1}, rng);
    const auto probe = probe_weights({2, 2, 4, 4}, rng);
    auto loss = [&] { return weighted_sum(pointwise_conv2d(x, w), probe); };
    CHECK(testutil::max_grad_rel_error(loss, {x, w}) < kTol);
}

TEST_CASE("maxpool2d gradients match finite differences") {
    Rng rng(104);
    auto x = dleaf({1, 2, 6, 6}, rng);  // continuous values: ties have measure zero
    const auto probe = probe_weights({1, 2, 3, 3}, rng);
    auto loss = [&] { return weighted_sum(maxpool2d(x, 2, 2), probe); };
    CHECK(testutil::max_grad_rel_error(loss, {x}) < kTol);
}

TEST_CASE("instance_norm gradients match finite differences") {
    Rng rng(105);
    auto x = dleaf({2, 2, 4, 4}, rng);
    const auto probe = probe_weights({2, 2, 4, 4}, rng);
    auto loss = [&] { return weighted_sum(instance_norm(x), probe); };
    CHECK(testutil::max_grad_rel_error(loss, {x}) < kTol);
}

TEST_CASE("layer_norm gradients match finite differences") {
    Rng rng(106);
    auto x = dleaf({2, 3, 4, 4}, rng);
    const auto probe = probe_weights({2, 3, 4, 4}, rng);
    auto loss = [&] { return weighted_sum(layer_norm(x), probe); };
    CHECK(testutil::max_grad_rel_error(loss, {x}) < kTol);
}

TEST_CASE("relu gradients match finite differences away from zero") {
    Rng rng(107);
    TensorT<double> t({3, 7});
    for (auto& v : t.data) {
        do {
            v = rng.normal();
        } while (std::abs(v) < 1e-3);  // keep the kink out of the stencil
    }
    auto x = make_var(t);
    const auto probe = probe_weights({3, 7}, rng);
    auto loss = [&] { return weighted_sum(relu(x), probe); };
    CHECK(testutil::max_grad_rel_error(loss, {x}) < kTol);
}

TEST_CASE("sigmoid gradients match finite differences") {
    Rng rng(108);
    auto x = dleaf({2, 9}, rng);
    const auto probe = probe_weights({2, 9}, rng);
    auto loss = [&] { return weighted_sum(sigmoid(x), probe); };
    CHECK(testutil::max_grad_rel_error(loss, {x}) < kTol);
}

TEST_CASE("fully_connected gradients match finite differences") {
    Rng rng(109);
    auto x = dleaf({3, 5}, rng);
    auto w = dleaf({5, 4}, rng);
    auto b = dleaf({4}, rng);
    const auto probe = probe_weights({3, 4}, rng);
    auto loss = [&] { return weighted_sum(fully_connected(x, w, b), probe); };
    CHECK(testutil::max_grad_rel_error(loss, {x, w, b}) < kTol);
}

TEST_CASE("softmax_cross_entropy gradients match finite differences") {
    Rng rng(110);
    auto logits = dleaf({4, 2}, rng);
    auto loss = [&] { return softmax_cross_entropy(logits, {0, 1, 1, 0}); };
    CHECK(testutil::max_grad_rel_error(loss, {logits}) < kTol);
}

TEST_CASE("l2_loss gradient matches 2(pred-target)/count and finite differences") {
    Rng rng(111);
    auto pred = dleaf({3, 4}, rng);
    const TensorT<double> target = testutil::random_tensor({3, 4}, rng);
    auto loss = [&] { return l2_loss(pred, target); };
    CHECK(testutil::max_grad_rel_error(loss, {pred}) < kTol);

    pred->zero_grad();
    backward(loss());
    for (std::size_t i = 0; i < pred->value.numel(); ++i) {
        const double expected =
            2.0 * (pred->value.data[i] - target.data[i]) / static_cast<double>(target.numel());
        CHECK(pred->grad[i] == doctest::Approx(expected).epsilon(1e-9));
    }
}

TEST_CASE("elementwise and shape plumbing gradients match finite differences") {
    Rng rng(112);
    auto a = dleaf({1, 2, 3, 3}, rng);
    auto b = dleaf({1, 2, 3, 3}, rng);
    auto c = dleaf({1, 1, 3, 3}, rng);
    const auto probe = probe_weights({1, 5, 3, 3}, rng);
    auto loss = [&] {
        auto sum = add(a, scale(b, 0.7));
        auto cat = concat_channels<double>({sum, reshape(c, {1, 1, 3, 3}), b});
        return weighted_sum(cat, probe);
    };
    CHECK(testutil::max_grad_rel_error(loss, {a, b, c}) < kTol);
}

TEST_CASE("gradients accumulate across backward passes") {
    Rng rng(113);
    auto x = dleaf({2, 2}, rng);
    const auto probe = probe_weights({2, 2}, rng);
    auto loss = [&] { return weighted_sum(scale(x, 3.0), probe); };
    backward(loss());
    const std::vector<double> once = x->grad;
    backward(loss());
    for (std::size_t i = 0; i < once.size(); ++i)
        CHECK(x->grad[i] == doctest::Approx(2.0 * once[i]));
}
