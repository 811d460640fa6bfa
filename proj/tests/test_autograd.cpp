#include <doctest.h>

#include "ffcvsr/autograd.hpp"
#include "ffcvsr/error.hpp"
#include "gradcheck.hpp"
#include "reference_ops.hpp"
#include "test_util.hpp"

using namespace ffcvsr;
using refops::Ref;
using testutil::check_op_gradients;
using testutil::random_tensor;
using testutil::random_tensor_nonzero;

namespace {
constexpr double kGradTol = 1e-4;
}

TEST_SUITE("autograd") {

TEST_CASE("gradient of mse(w, 0) for a scalar-like value") {
    GradientTape tape;
    Tensor w = Tensor::full(Shape{1, 1, 1, 1}, 3.0f);
    const int node = tape.watch(w);
    Tensor loss = mse(w, Tensor::zeros(Shape{1, 1, 1, 1}));
    auto grads = tape.gradients(loss);
    CHECK(grads.at(node).item() == doctest::Approx(6.0).epsilon(1e-6));
}

TEST_CASE("parameter unused by the loss has no gradient entry") {
    auto rng = testutil::make_rng(31);
    GradientTape tape;
    Tensor used = random_tensor(Shape{1, 1, 2, 2}, rng);
    Tensor unused = random_tensor(Shape{1, 1, 2, 2}, rng);
    const int used_node = tape.watch(used);
    const int unused_node = tape.watch(unused);

    Tensor loss = mse(used, Tensor::zeros(used.shape()));
    auto grads = tape.gradients(loss);
    CHECK(grads.count(used_node) == 1);
    CHECK(grads.count(unused_node) == 0); // reads back as a zero gradient
}

TEST_CASE("loss must be a scalar node on the tape") {
    auto rng = testutil::make_rng(32);
    GradientTape tape;
    Tensor w = random_tensor(Shape{1, 1, 2, 2}, rng);
    tape.watch(w);

    Tensor off_tape = random_tensor(Shape{1, 1, 1, 1}, rng);
    CHECK_THROWS_AS(tape.gradients(off_tape), Error);
    CHECK_THROWS_AS(tape.gradients(w), Error); // non-scalar
}

TEST_CASE("values consumed twice accumulate gradients by summation") {
    GradientTape tape;
    Tensor w = Tensor::full(Shape{1, 1, 1, 1}, 2.0f);
    const int node = tape.watch(w);
    Tensor doubled = add(w, w);
    Tensor loss = mse(doubled, Tensor::zeros(Shape{1, 1, 1, 1}));
    auto grads = tape.gradients(loss);
    // d/dw (2w)^2 = 8w = 16
    CHECK(grads.at(node).item() == doctest::Approx(16.0).epsilon(1e-6));
}

TEST_CASE("conv2d gradients match finite differences") {
    auto rng = testutil::make_rng(33);
    std::vector<Tensor> inputs = {random_tensor(Shape{1, 2, 4, 4}, rng),
                                  random_tensor(Shape{3, 2, 3, 3}, rng),
                                  random_tensor(Shape{1, 3, 1, 1}, rng)};
    Tensor target = random_tensor(Shape{1, 3, 4, 4}, rng);
    Ref ref_target = refops::from_tensor(target);

    auto result = check_op_gradients(
        [&](const std::vector<Tensor>& in) {
            return mse(conv2d(in[0], in[1], in[2], 1, 1), target);
        },
        [&](const std::vector<Ref>& in) {
            return refops::mse(refops::conv2d(in[0], in[1], in[2], 1, 1), ref_target);
        },
        inputs);
    CHECK(result.max_error <= kGradTol);
}

TEST_CASE("strided conv2d gradients match finite differences") {
    auto rng = testutil::make_rng(34);
    std::vector<Tensor> inputs = {random_tensor(Shape{1, 2, 5, 5}, rng),
                                  random_tensor(Shape{2, 2, 3, 3}, rng),
                                  random_tensor(Shape{1, 2, 1, 1}, rng)};
    Tensor target = random_tensor(Shape{1, 2, 3, 3}, rng);
    Ref ref_target = refops::from_tensor(target);

    auto result = check_op_gradients(
        [&](const std::vector<Tensor>& in) {
            return mse(conv2d(in[0], in[1], in[2], 2, 1), target);
        },
        [&](const std::vector<Ref>& in) {
            return refops::mse(refops::conv2d(in[0], in[1], in[2], 2, 1), ref_target);
        },
        inputs);
    CHECK(result.max_error <= kGradTol);
}

TEST_CASE("conv2d_transpose gradients match finite differences") {
    auto rng = testutil::make_rng(35);
    std::vector<Tensor> inputs = {random_tensor(Shape{1, 2, 3, 3}, rng),
                                  random_tensor(Shape{2, 1, 8, 8}, rng),
                                  random_tensor(Shape{1, 1, 1, 1}, rng)};
    Tensor target = random_tensor(Shape{1, 1, 12, 12}, rng);
    Ref ref_target = refops::from_tensor(target);

    auto result = check_op_gradients(
        [&](const std::vector<Tensor>& in) {
            return mse(conv2d_transpose(in[0], in[1], in[2], 4, 2), target);
        },
        [&](const std::vector<Ref>& in) {
            return refops::mse(refops::conv2d_transpose(in[0], in[1], in[2], 4, 2), ref_target);
        },
        inputs);
    CHECK(result.max_error <= kGradTol);
}

TEST_CASE("space_to_depth and depth_to_space gradients match finite differences") {
    auto rng = testutil::make_rng(36);
    Tensor target_s2d = random_tensor(Shape{1, 4, 2, 2}, rng);
    Ref ref_target_s2d = refops::from_tensor(target_s2d);
    auto s2d = check_op_gradients(
        [&](const std::vector<Tensor>& in) { return mse(space_to_depth(in[0], 2), target_s2d); },
        [&](const std::vector<Ref>& in) {
            return refops::mse(refops::space_to_depth(in[0], 2), ref_target_s2d);
        },
        {random_tensor(Shape{1, 1, 4, 4}, rng)});
    CHECK(s2d.max_error <= kGradTol);

    Tensor target_d2s = random_tensor(Shape{1, 1, 4, 4}, rng);
    Ref ref_target_d2s = refops::from_tensor(target_d2s);
    auto d2s = check_op_gradients(
        [&](const std::vector<Tensor>& in) { return mse(depth_to_space(in[0], 2), target_d2s); },
        [&](const std::vector<Ref>& in) {
            return refops::mse(refops::depth_to_space(in[0], 2), ref_target_d2s);
        },
        {random_tensor(Shape{1, 4, 2, 2}, rng)});
    CHECK(d2s.max_error <= kGradTol);
}

TEST_CASE("relu gradients match finite differences away from the kink") {
    auto rng = testutil::make_rng(37);
    Tensor target = random_tensor(Shape{1, 2, 4, 4}, rng);
    Ref ref_target = refops::from_tensor(target);
    auto result = check_op_gradients(
        [&](const std::vector<Tensor>& in) { return mse(relu(in[0]), target); },
        [&](const std::vector<Ref>& in) { return refops::mse(refops::relu(in[0]), ref_target); },
        {random_tensor_nonzero(Shape{1, 2, 4, 4}, rng)});
    CHECK(result.max_error <= kGradTol);
}

TEST_CASE("add, concat_channels and mul_scalar gradients match finite differences") {
    auto rng = testutil::make_rng(38);
    Tensor target = random_tensor(Shape{1, 2, 3, 3}, rng);
    Ref ref_target = refops::from_tensor(target);
    auto added = check_op_gradients(
        [&](const std::vector<Tensor>& in) { return mse(add(in[0], in[1]), target); },
        [&](const std::vector<Ref>& in) {
            return refops::mse(refops::add(in[0], in[1]), ref_target);
        },
        {random_tensor(Shape{1, 2, 3, 3}, rng), random_tensor(Shape{1, 2, 3, 3}, rng)});
    CHECK(added.max_error <= kGradTol);

    Tensor cat_target = random_tensor(Shape{1, 5, 3, 3}, rng);
    Ref ref_cat_target = refops::from_tensor(cat_target);
    auto cat = check_op_gradients(
        [&](const std::vector<Tensor>& in) {
            return mse(concat_channels({in[0], in[1]}), cat_target);
        },
        [&](const std::vector<Ref>& in) {
            return refops::mse(refops::concat_channels({in[0], in[1]}), ref_cat_target);
        },
        {random_tensor(Shape{1, 2, 3, 3}, rng), random_tensor(Shape{1, 3, 3, 3}, rng)});
    CHECK(cat.max_error <= kGradTol);

    Tensor scale_target = random_tensor(Shape{1, 2, 3, 3}, rng);
    Ref ref_scale_target = refops::from_tensor(scale_target);
    auto scaled = check_op_gradients(
        [&](const std::vector<Tensor>& in) { return mse(mul_scalar(in[0], 0.3f), scale_target); },
        [&](const std::vector<Ref>& in) {
            return refops::mse(refops::mul_scalar(in[0], 0.3), ref_scale_target);
        },
        {random_tensor(Shape{1, 2, 3, 3}, rng)});
    CHECK(scaled.max_error <= kGradTol);
}

TEST_CASE("mse gradients with respect to both arguments") {
    auto rng = testutil::make_rng(39);
    auto result = check_op_gradients(
        [&](const std::vector<Tensor>& in) { return mse(in[0], in[1]); },
        [&](const std::vector<Ref>& in) { return refops::mse(in[0], in[1]); },
        {random_tensor(Shape{1, 2, 4, 4}, rng), random_tensor(Shape{1, 2, 4, 4}, rng)});
    CHECK(result.max_error <= kGradTol);
}

TEST_CASE("ops run without recording when no tape is active") {
    auto rng = testutil::make_rng(40);
    Tensor x = random_tensor(Shape{1, 1, 4, 4}, rng);
    Tensor y = relu(x);
    CHECK(y.node() == -1);
}

} // TEST_SUITE
