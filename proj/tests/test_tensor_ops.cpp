#include <doctest.h>

#include "ffcvsr/autograd.hpp"
#include "ffcvsr/error.hpp"
#include "reference_ops.hpp"
#include "test_util.hpp"

using namespace ffcvsr;
using testutil::bit_equal;
using testutil::max_abs_diff;
using testutil::random_tensor;

TEST_SUITE("tensor_ops") {

TEST_CASE("tensor basics") {
    Tensor t = Tensor::zeros(Shape{1, 2, 3, 4});
    CHECK(t.numel() == 24);
    t.at(0, 1, 2, 3) = 5.0f;
    CHECK(t.data()[23] == 5.0f);

    Tensor shallow = t;
    shallow.data()[0] = 7.0f;
    CHECK(t.data()[0] == 7.0f);

    Tensor deep = t.clone();
    deep.data()[0] = 9.0f;
    CHECK(t.data()[0] == 7.0f);

    CHECK_THROWS_AS(Tensor::from_vector(Shape{1, 1, 2, 2}, {1.0f, 2.0f}), Error);
    CHECK_THROWS_AS(t.item(), Error);
}

TEST_CASE("conv2d identity kernel reproduces the input") {
    auto rng = testutil::make_rng(11);
    Tensor input = random_tensor(Shape{1, 1, 3, 3}, rng);
    Tensor kernel = Tensor::zeros(Shape{1, 1, 3, 3});
    kernel.at(0, 0, 1, 1) = 1.0f;
    Tensor bias = Tensor::zeros(Shape{1, 1, 1, 1});

    Tensor out = conv2d(input, kernel, bias, 1, 1);
    CHECK(bit_equal(out, input));
}

TEST_CASE("conv2d of a zero input is the bias in every plane") {
    auto rng = testutil::make_rng(12);
    Tensor input = Tensor::zeros(Shape{2, 16, 5, 5});
    Tensor w = random_tensor(Shape{3, 16, 3, 3}, rng);
    Tensor bias = Tensor::from_vector(Shape{1, 3, 1, 1}, {0.25f, -1.5f, 3.0f});

    Tensor out = conv2d(input, w, bias, 1, 1);
    for (int64_t b = 0; b < 2; ++b)
        for (int64_t oc = 0; oc < 3; ++oc)
            for (int64_t y = 0; y < 5; ++y)
                for (int64_t x = 0; x < 5; ++x)
                    CHECK(out.at(b, oc, y, x) == bias.at(0, oc, 0, 0));
}

TEST_CASE("conv2d matches the nested-sum oracle") {
    auto rng = testutil::make_rng(13);
    Tensor input = random_tensor(Shape{1, 2, 5, 5}, rng);
    Tensor w = random_tensor(Shape{4, 2, 3, 3}, rng);
    Tensor bias = random_tensor(Shape{1, 4, 1, 1}, rng);

    for (const auto& [stride, pad] : {std::pair{1, 1}, std::pair{1, 0}, std::pair{2, 1}}) {
        Tensor out = conv2d(input, w, bias, stride, pad);
        refops::Ref expect = refops::conv2d(refops::from_tensor(input), refops::from_tensor(w),
                                            refops::from_tensor(bias), stride, pad);
        CHECK(max_abs_diff(out, refops::to_tensor(expect)) < 1e-5);
    }
}

TEST_CASE("conv2d rejects bad shapes") {
    auto rng = testutil::make_rng(14);
    Tensor input = random_tensor(Shape{1, 2, 5, 5}, rng);
    Tensor w = random_tensor(Shape{4, 3, 3, 3}, rng); // wrong in-channels
    Tensor bias = Tensor::zeros(Shape{1, 4, 1, 1});
    CHECK_THROWS_WITH_AS(conv2d(input, w, bias, 1, 1),
                         doctest::Contains("channels"), Error);

    Tensor w_ok = random_tensor(Shape{4, 2, 3, 3}, rng);
    CHECK_THROWS_AS(conv2d(input, w_ok, Tensor::zeros(Shape{1, 2, 1, 1}), 1, 1), Error);
    CHECK_THROWS_AS(conv2d(input, w_ok, bias, 0, 1), Error);
    // 7x7 kernel on a 5x5 input with no padding has no valid placement
    CHECK_THROWS_AS(conv2d(input, random_tensor(Shape{1, 2, 7, 7}, rng),
                           Tensor::zeros(Shape{1, 1, 1, 1}), 1, 0), Error);
}

TEST_CASE("conv2d_transpose upsamples 4x with the 8x8/stride-4 geometry") {
    auto rng = testutil::make_rng(15);
    Tensor input = random_tensor(Shape{1, 1, 2, 2}, rng);
    Tensor w = random_tensor(Shape{1, 1, 8, 8}, rng);
    Tensor bias = random_tensor(Shape{1, 1, 1, 1}, rng);

    Tensor out = conv2d_transpose(input, w, bias, 4, 2);
    CHECK(out.shape() == Shape{1, 1, 8, 8});
}

TEST_CASE("conv2d_transpose with zero weights and bias is zero") {
    auto rng = testutil::make_rng(16);
    Tensor input = random_tensor(Shape{1, 3, 4, 4}, rng);
    Tensor w = Tensor::zeros(Shape{3, 2, 8, 8});
    Tensor bias = Tensor::zeros(Shape{1, 2, 1, 1});
    Tensor out = conv2d_transpose(input, w, bias, 4, 2);
    CHECK(bit_equal(out, Tensor::zeros(out.shape())));
}

TEST_CASE("conv2d_transpose matches the zero-insertion + flipped-kernel oracle") {
    auto rng = testutil::make_rng(17);
    Tensor input = random_tensor(Shape{1, 3, 4, 5}, rng);
    Tensor bias = random_tensor(Shape{1, 2, 1, 1}, rng);

    for (const auto& [k, stride, pad] :
         {std::tuple{8, 4, 2}, std::tuple{4, 2, 1}, std::tuple{3, 1, 1}}) {
        Tensor w = random_tensor(Shape{3, 2, k, k}, rng);
        Tensor out = conv2d_transpose(input, w, bias, stride, pad);
        refops::Ref expect =
            refops::conv2d_transpose(refops::from_tensor(input), refops::from_tensor(w),
                                     refops::from_tensor(bias), stride, pad);
        CHECK(max_abs_diff(out, refops::to_tensor(expect)) < 1e-5);
    }
}

TEST_CASE("conv2d / conv2d_transpose adjointness") {
    auto rng = testutil::make_rng(18);
    for (const auto& [k, stride, pad] :
         {std::tuple{3, 1, 1}, std::tuple{4, 2, 1}, std::tuple{8, 4, 2}}) {
        Tensor x = random_tensor(Shape{1, 3, 8, 8}, rng);
        Tensor w = random_tensor(Shape{5, 3, k, k}, rng);
        Tensor zero_out = Tensor::zeros(Shape{1, 5, 1, 1});
        Tensor zero_in = Tensor::zeros(Shape{1, 3, 1, 1});

        Tensor ax = conv2d(x, w, zero_out, stride, pad);
        Tensor y = random_tensor(ax.shape(), rng);
        // conv2d_transpose reads the same weight tensor as (in=5, out=3).
        Tensor w_t = Tensor::from_vector(Shape{5, 3, k, k},
                                         std::vector<float>(w.data(), w.data() + w.numel()));
        Tensor aty = conv2d_transpose(y, w_t, zero_in, stride, pad);
        CHECK(aty.shape() == x.shape());

        double lhs = 0.0, rhs = 0.0;
        for (int64_t i = 0; i < ax.numel(); ++i)
            lhs += static_cast<double>(ax.data()[i]) * y.data()[i];
        for (int64_t i = 0; i < x.numel(); ++i)
            rhs += static_cast<double>(x.data()[i]) * aty.data()[i];
        CHECK(std::fabs(lhs - rhs) / std::max({std::fabs(lhs), std::fabs(rhs), 1.0}) < 1e-4);
    }
}

TEST_CASE("space_to_depth declared channel order") {
    std::vector<float> vals(16);
    for (int i = 0; i < 16; ++i)
        vals[static_cast<size_t>(i)] = static_cast<float>(i);
    Tensor input = Tensor::from_vector(Shape{1, 1, 4, 4}, vals);

    Tensor out = space_to_depth(input, 4);
    CHECK(out.shape() == Shape{1, 16, 1, 1});
    for (int64_t c = 0; c < 16; ++c)
        CHECK(out.at(0, c, 0, 0) == static_cast<float>(c));
}

TEST_CASE("space_to_depth block 1 is the identity") {
    auto rng = testutil::make_rng(19);
    Tensor input = random_tensor(Shape{2, 3, 4, 6}, rng);
    CHECK(bit_equal(space_to_depth(input, 1), input));
    CHECK(bit_equal(depth_to_space(input, 1), input));
}

TEST_CASE("space_to_depth / depth_to_space round trip is bit-exact") {
    auto rng = testutil::make_rng(20);
    for (const auto& [c, h, w, block] :
         {std::tuple{1, 8, 8, 4}, std::tuple{3, 6, 9, 3}, std::tuple{2, 4, 4, 2}}) {
        Tensor input = random_tensor(Shape{2, c, h, w}, rng);
        CHECK(bit_equal(depth_to_space(space_to_depth(input, block), block), input));

        refops::Ref expect = refops::space_to_depth(refops::from_tensor(input), block);
        CHECK(bit_equal(space_to_depth(input, block), refops::to_tensor(expect)));
    }
}

TEST_CASE("depth_to_space index formula") {
    Tensor input = Tensor::from_vector(Shape{1, 4, 1, 1}, {1.0f, 2.0f, 3.0f, 4.0f});
    Tensor out = depth_to_space(input, 2);
    CHECK(out.shape() == Shape{1, 1, 2, 2});
    CHECK(out.at(0, 0, 0, 0) == 1.0f);
    CHECK(out.at(0, 0, 0, 1) == 2.0f);
    CHECK(out.at(0, 0, 1, 0) == 3.0f);
    CHECK(out.at(0, 0, 1, 1) == 4.0f);
}

TEST_CASE("space_to_depth rejects indivisible extents") {
    Tensor input = Tensor::zeros(Shape{1, 1, 5, 4});
    CHECK_THROWS_AS(space_to_depth(input, 4), Error);
    CHECK_THROWS_AS(depth_to_space(Tensor::zeros(Shape{1, 3, 2, 2}), 2), Error);
}

TEST_CASE("relu, add, concat") {
    Tensor x = Tensor::from_vector(Shape{1, 1, 1, 3}, {-1.0f, 0.0f, 2.0f});
    Tensor r = relu(x);
    CHECK(r.at(0, 0, 0, 0) == 0.0f);
    CHECK(r.at(0, 0, 0, 1) == 0.0f);
    CHECK(r.at(0, 0, 0, 2) == 2.0f);

    auto rng = testutil::make_rng(21);
    Tensor a = random_tensor(Shape{1, 2, 3, 3}, rng);
    CHECK(bit_equal(add(a, Tensor::zeros(a.shape())), a));
    CHECK_THROWS_AS(add(a, Tensor::zeros(Shape{1, 2, 3, 4})), Error);

    Tensor p1 = random_tensor(Shape{1, 2, 3, 3}, rng);
    Tensor p2 = random_tensor(Shape{1, 3, 3, 3}, rng);
    Tensor cat = concat_channels({p1, p2});
    CHECK(cat.shape() == Shape{1, 5, 3, 3});
    for (int64_t c = 0; c < 2; ++c)
        for (int64_t i = 0; i < 9; ++i)
            CHECK(cat.data()[c * 9 + i] == p1.data()[c * 9 + i]);
    for (int64_t c = 0; c < 3; ++c)
        for (int64_t i = 0; i < 9; ++i)
            CHECK(cat.data()[(2 + c) * 9 + i] == p2.data()[c * 9 + i]);
    CHECK_THROWS_AS(concat_channels({p1, Tensor::zeros(Shape{1, 1, 4, 3})}), Error);
}

TEST_CASE("mse trivial values and oracle") {
    auto rng = testutil::make_rng(22);
    Tensor x = random_tensor(Shape{1, 2, 4, 4}, rng);
    CHECK(mse(x, x).item() == 0.0f);

    Tensor a = Tensor::zeros(Shape{1, 1, 4, 4});
    Tensor b = Tensor::full(Shape{1, 1, 4, 4}, 0.1f);
    CHECK(mse(a, b).item() == doctest::Approx(0.01).epsilon(1e-6));

    Tensor u = random_tensor(Shape{1, 3, 5, 5}, rng);
    Tensor v = random_tensor(Shape{1, 3, 5, 5}, rng);
    const double expect = refops::mse(refops::from_tensor(u), refops::from_tensor(v));
    CHECK(std::fabs(mse(u, v).item() - expect) / expect < 1e-7);

    CHECK_THROWS_AS(mse(u, Tensor::zeros(Shape{1, 3, 5, 6})), Error);
}

TEST_CASE("forward passes are deterministic") {
    auto rng = testutil::make_rng(23);
    Tensor input = random_tensor(Shape{1, 3, 6, 6}, rng);
    Tensor w = random_tensor(Shape{4, 3, 3, 3}, rng);
    Tensor bias = random_tensor(Shape{1, 4, 1, 1}, rng);

    CHECK(bit_equal(conv2d(input, w, bias, 1, 1), conv2d(input, w, bias, 1, 1)));

    Tensor wt = random_tensor(Shape{3, 1, 8, 8}, rng);
    Tensor bt = random_tensor(Shape{1, 1, 1, 1}, rng);
    CHECK(bit_equal(conv2d_transpose(input, wt, bt, 4, 2),
                    conv2d_transpose(input, wt, bt, 4, 2)));
}

TEST_CASE("finite forward outputs on finite inputs") {
    auto rng = testutil::make_rng(24);
    Tensor input = random_tensor(Shape{1, 4, 8, 8}, rng);
    Tensor w = random_tensor(Shape{8, 4, 3, 3}, rng);
    Tensor bias = random_tensor(Shape{1, 8, 1, 1}, rng);
    Tensor out = relu(conv2d(input, w, bias, 1, 1));
    CHECK(out.all_finite());
}

} // TEST_SUITE
