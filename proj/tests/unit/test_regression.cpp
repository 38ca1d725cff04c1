#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "bermudan/errors.hpp"
#include "bermudan/random.hpp"
#include "bermudan/regression.hpp"

using namespace bermudan;

namespace {

// Put-like payoff on two noisy inputs, already in normalized units.
TrainingSet toy_data(std::size_t n, std::size_t inputs, std::uint64_t seed) {
    Xoshiro256 rng(seed);
    TrainingSet d;
    d.n = n;
    d.inputs = inputs;
    d.x.resize(n * inputs);
    d.y.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (std::size_t k = 0; k < inputs; ++k) {
            d.x[i * inputs + k] = rng.normal();
            s += d.x[i * inputs + k] / static_cast<double>(inputs);
        }
        d.y[i] = std::max(0.3 - s, 0.0) + 0.2 * s;
    }
    return d;
}

double relative_gap(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-6); }

}  // namespace

TEST(Regression, GradientMatchesFiniteDifferences) {
    for (auto design : {NetworkDesign::OneFactor, NetworkDesign::LocallyConnected, NetworkDesign::FullyConnectedLog}) {
        const std::size_t inputs = design == NetworkDesign::OneFactor ? 1 : 2;
        const auto data = toy_data(200, inputs, 3);
        auto net = initialize(design, 8, inputs, nullptr, 17);
        Gradient g;
        loss_and_gradient(net, data, {}, &g);

        auto check = [&](std::vector<double>& theta, const std::vector<double>& grad, const char* name) {
            for (std::size_t n = 0; n < theta.size(); ++n) {
                if (&theta == &net.w1 && !net.mask[n]) {
                    EXPECT_EQ(grad[n], 0.0);
                    continue;
                }
                const double keep = theta[n], h = 1e-6;
                theta[n] = keep + h;
                const double up = loss_and_gradient(net, data, {}, nullptr);
                theta[n] = keep - h;
                const double down = loss_and_gradient(net, data, {}, nullptr);
                theta[n] = keep;
                const double fd = (up - down) / (2 * h);
                EXPECT_LT(relative_gap(grad[n], fd), 1e-4) << name << "[" << n << "] " << to_string(design);
            }
        };
        check(net.w1, g.w1, "w1");
        check(net.b, g.b, "b");
        check(net.w2, g.w2, "w2");
    }
}

TEST(Regression, MiniBatchGradientUsesOnlyListedRows) {
    const auto data = toy_data(50, 1, 8);
    auto net = initialize(NetworkDesign::OneFactor, 4, 1, nullptr, 2);
    std::vector<std::size_t> idx{3, 7, 11};
    TrainingSet sub;
    sub.n = 3;
    sub.inputs = 1;
    for (auto i : idx) {
        sub.x.push_back(data.x[i]);
        sub.y.push_back(data.y[i]);
    }
    Gradient a, b;
    const double la = loss_and_gradient(net, data, idx, &a);
    const double lb = loss_and_gradient(net, sub, {}, &b);
    EXPECT_DOUBLE_EQ(la, lb);
    EXPECT_EQ(a.w2, b.w2);
}

TEST(Regression, InitializationSigns) {
    for (auto design : {NetworkDesign::OneFactor, NetworkDesign::LocallyConnected, NetworkDesign::FullyConnectedLog}) {
        const std::size_t inputs = design == NetworkDesign::OneFactor ? 1 : 4;
        const auto net = initialize(design, 16, inputs, nullptr, 5);
        for (std::size_t n = 0; n < net.w1.size(); ++n) {
            if (!net.mask[n]) {
                EXPECT_EQ(net.w1[n], 0.0);
                continue;
            }
            EXPECT_LE(net.w1[n], 0.0);
            EXPECT_GE(net.w1[n], -1.0);
        }
        for (std::size_t j = 0; j < net.q; ++j) {
            EXPECT_GE(net.b[j], 0.0);
            EXPECT_LE(net.b[j], 1.0);
            EXPECT_LE(std::abs(net.w2[j]), 1.0);
        }
    }
}

TEST(Regression, LocallyConnectedHasOneInputPerNode) {
    const auto net = initialize(NetworkDesign::LocallyConnected, 12, 3, nullptr, 1);
    for (std::size_t j = 0; j < net.q; ++j) {
        int live = 0;
        for (std::size_t k = 0; k < 3; ++k) live += net.mask[j * 3 + k];
        EXPECT_EQ(live, 1);
        EXPECT_TRUE(net.mask[j * 3 + HedgeNetwork::assigned_input(j, 12, 3)]);
    }
    EXPECT_THROW(initialize(NetworkDesign::LocallyConnected, 10, 3, nullptr, 1), std::invalid_argument);
}

TEST(Regression, WarmStartCopiesPrevious) {
    const auto prev = initialize(NetworkDesign::OneFactor, 8, 1, nullptr, 9);
    const auto net = initialize(NetworkDesign::OneFactor, 8, 1, &prev, 10);
    EXPECT_EQ(net.w1, prev.w1);
    EXPECT_EQ(net.w2, prev.w2);
    EXPECT_THROW(initialize(NetworkDesign::OneFactor, 4, 1, &prev, 10), ContractError);
}

TEST(Regression, NormalizationConstants) {
    const std::vector<double> x{1.0, 2.0, 3.0, 4.0};
    const std::vector<double> y{2.0, 4.0, 6.0, 8.0};
    auto [set, norm] = normalize(x, y, 1);
    EXPECT_DOUBLE_EQ(norm.mu_z[0], 2.5);
    EXPECT_NEAR(norm.sigma_z[0], std::sqrt(5.0 / 3.0), 1e-15);
    EXPECT_NEAR(norm.sigma_v, 2.0 * std::sqrt(5.0 / 3.0), 1e-14);
    EXPECT_NEAR(set.y[3], 8.0 / norm.sigma_v, 1e-15);
    EXPECT_THROW(normalize(std::vector<double>{1, 1, 1}, std::vector<double>{1, 2, 3}, 1), std::domain_error);
}

TEST(Regression, TrainingReducesError) {
    const auto data = toy_data(2000, 1, 4);
    auto net = initialize(NetworkDesign::OneFactor, 16, 1, nullptr, 6);
    const double before = loss_and_gradient(net, data, {}, nullptr);
    TrainOptions o;
    o.epochs = 200;
    o.refit_output = false;
    const auto diag = train(net, data, o);
    EXPECT_LT(diag.normalized_mse, 0.05 * before);
    EXPECT_LE(diag.epochs, 200u);
}

TEST(Regression, OutputRefitNeverIncreasesError) {
    const auto data = toy_data(500, 2, 5);
    auto net = initialize(NetworkDesign::FullyConnectedLog, 8, 2, nullptr, 3);
    const double before = loss_and_gradient(net, data, {}, nullptr);
    const bool changed = refit_output_layer(net, data);
    const double after = loss_and_gradient(net, data, {}, nullptr);
    EXPECT_TRUE(changed);
    EXPECT_LT(after, before);
    EXPECT_FALSE(refit_output_layer(net, data));
}

TEST(Regression, DivergenceRaisesTrainingError) {
    auto data = toy_data(100, 1, 4);
    data.y[5] = std::nan("");
    auto net = initialize(NetworkDesign::OneFactor, 4, 1, nullptr, 6);
    TrainOptions o;
    o.epochs = 5;
    EXPECT_THROW(train(net, data, o), TrainingError);
}

TEST(Regression, DenormalizedWeightsReproduceOutput) {
    auto net = initialize(NetworkDesign::FullyConnectedLog, 6, 2, nullptr, 11);
    net.mu_z = {0.9, -0.1};
    net.sigma_z = {0.05, 0.2};
    net.sigma_v = 3.0;
    const auto eff = denormalized_portfolio_weights(net);
    const std::vector<double> z{0.93, -0.2};
    double out = 0.0;
    for (std::size_t j = 0; j < eff.q; ++j) {
        double a = eff.b[j];
        for (std::size_t k = 0; k < 2; ++k) a += eff.w1[j * 2 + k] * z[k];
        out += eff.w2[j] * std::max(a, 0.0);
    }
    EXPECT_NEAR(out, net.forward(z), 1e-12);
}

TEST(Regression, NetworkRoundTripIsExact) {
    auto net = initialize(NetworkDesign::LocallyConnected, 6, 2, nullptr, 21);
    net.mu_z = {0.91, 0.87};
    net.sigma_z = {0.013, 0.021};
    net.sigma_v = 1.7;
    std::stringstream s;
    write_network(s, net);
    const auto back = read_network(s);
    EXPECT_EQ(back.w1, net.w1);
    EXPECT_EQ(back.b, net.b);
    EXPECT_EQ(back.w2, net.w2);
    EXPECT_EQ(back.mask, net.mask);
    EXPECT_EQ(back.mu_z, net.mu_z);
    EXPECT_EQ(back.sigma_v, net.sigma_v);
    EXPECT_EQ(back.design, net.design);
}

TEST(Regression, ForwardRejectsWrongDimension) {
    const auto net = initialize(NetworkDesign::FullyConnectedLog, 4, 2, nullptr, 1);
    EXPECT_THROW(net.forward(std::vector<double>{1.0}), std::invalid_argument);
}
