#include <doctest.h>

#include <numeric>
#include <random>

#include "dsgarm/analytic/backoff.hpp"
#include "support.hpp"

using namespace dsgarm;
using namespace dsgarm::analytic;

namespace {

// Attempts per slot of a single node whose attempts fail with probability p.
double simulated_tau(const BackoffLaw& law, int g, double p, long slots, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::bernoulli_distribution fail(p);
    auto draw = [&](int stage) {
        std::discrete_distribution<int> d(law[stage].begin(), law[stage].end());
        return d(rng);
    };
    int stage = 0, counter = draw(0);
    long attempts = 0;
    for (long t = 0; t < slots; ++t) {
        if (counter > 0) {
            --counter;
            continue;
        }
        ++attempts;
        stage = fail(rng) ? std::min(stage + 1, g) : 0;
        counter = draw(stage);
    }
    return static_cast<double>(attempts) / slots;
}

}  // namespace

TEST_CASE("uniform law doubles the window per stage") {
    const ContentionParams c{16, 5, 2};
    const auto law = uniform_backoff(c);
    REQUIRE(law.size() == 6u);
    for (int i = 0; i <= 5; ++i) {
        CHECK(law[i].size() == static_cast<std::size_t>(16 << i));
        CHECK(std::accumulate(law[i].begin(), law[i].end(), 0.0) == doctest::Approx(1.0));
    }
    CHECK(chain_tau(law, 5, 0.0) == doctest::Approx(2.0 / 17.0));
}

TEST_CASE("reserved law without reservations equals the uniform law") {
    const ContentionParams c{8, 3, 2};
    const std::vector<double> none(200, 0.0);
    const auto a = reserved_backoff(c, none, 4);
    const auto b = uniform_backoff(c);
    for (int i = 0; i <= 3; ++i)
        for (std::size_t v = 0; v < a[i].size(); ++v) CHECK(a[i][v] == doctest::Approx(v < b[i].size() ? b[i][v] : 0.0));
}

TEST_CASE("reserved law against sampling over a random ledger") {
    const ContentionParams c{8, 2, 2};
    const int m_rel = 6;
    std::vector<double> r(64);
    for (std::size_t j = 0; j < r.size(); ++j) r[j] = 0.15 + 0.5 * ((j * 7) % 5) / 5.0;
    const auto law = reserved_backoff(c, r, m_rel);
    std::mt19937_64 rng(11);
    for (int i = 0; i <= 2; ++i) {
        const int w = 8 << i;
        const int span = w + m_rel;
        std::vector<double> hist(span, 0.0);
        double kept = 0.0;
        for (int s = 0; s < 400000; ++s) {
            const int u = std::uniform_int_distribution<int>(0, w - 1)(rng);
            int seen = 0;
            for (int j = 1; j <= span; ++j) {
                if (std::bernoulli_distribution(r[j - 1])(rng)) continue;
                if (seen++ == u) {
                    hist[j - 1] += 1.0;
                    kept += 1.0;
                    break;
                }
            }
        }
        double tv = 0.0;
        for (int v = 0; v < span; ++v) tv += std::abs(hist[v] / kept - law[i][v]);
        CAPTURE(i);
        CHECK(0.5 * tv < 0.01);
    }
}

TEST_CASE("stage chain attempt rate against stepped simulation") {
    const ContentionParams c{16, 4, 2};
    const auto law = uniform_backoff(c);
    for (double p : {0.0, 0.2, 0.5, 0.8}) {
        const double mc = simulated_tau(law, 4, p, 4000000, 13);
        CHECK(chain_tau(law, 4, p) == doctest::Approx(mc).epsilon(0.02));
    }
    CHECK(std::isfinite(chain_tau(law, 4, 1.0)));
}

TEST_CASE("classic contention reduction") {
    for (int m : {2, 5, 10, 20, 50, 100})
        for (int w0 : {8, 16, 32}) {
            BackoffInput in;
            in.m_cs = m;
            in.contention = {w0, 5, 2};
            in.p_bo = uniform_backoff(in.contention);
            const auto got = backoff_model(in);
            const auto ref = testsupport::bianchi(m, w0, 5);
            CAPTURE(m);
            CAPTURE(w0);
            CHECK(std::abs(got.tau - ref.tau) < 1e-9);
            CHECK(std::abs(got.p - ref.p) < 1e-9);
            CHECK(std::abs(got.p_tr - ref.p_tr) < 1e-9);
            CHECK(std::abs(got.p_s - ref.p_s) < 1e-9);
            CHECK(got.u_bo == doctest::Approx((1.0 - ref.p_tr) / ref.p_tr));
        }
}

TEST_CASE("reserved slots scale the conditional attempt rate") {
    BackoffInput in;
    in.m_cs = 10;
    in.contention = {16, 5, 2};
    in.p_bo = uniform_backoff(in.contention);
    in.p_rel_tot = 0.3;
    const auto s = backoff_model(in);
    CHECK(s.tau_unreserved == doctest::Approx(s.tau / 0.7));
    CHECK(s.p_c == doctest::Approx(1.0 - std::pow(1.0 - s.tau_unreserved, 9)));
}

TEST_CASE("channel errors add to the failure probability") {
    BackoffInput in;
    in.m_cs = 1;
    in.contention = {16, 5, 2};
    in.p_bo = uniform_backoff(in.contention);
    in.p_e = 0.2;
    const auto s = backoff_model(in);
    CHECK(s.p == doctest::Approx(0.2));
    CHECK(s.p_c == doctest::Approx(0.0));
    CHECK(s.p_s == doctest::Approx(1.0));
}

TEST_CASE("non-reservation REL nodes join the contention") {
    BackoffInput in;
    in.m_cs = 4;
    in.m_rel = 10;
    in.p_no_rsv = 0.1;
    in.contention = {16, 5, 2};
    in.p_bo = uniform_backoff(in.contention);
    const auto s = backoff_model(in);
    CHECK(s.m_con == doctest::Approx(5.0));
}

TEST_CASE("invalid inputs") {
    BackoffInput in;
    in.m_cs = 3;
    in.contention = {16, 5, 2};
    in.p_bo = uniform_backoff(in.contention);
    in.p_rel_tot = 1.0;
    CHECK_THROWS_AS(backoff_model(in), std::invalid_argument);
    in.p_rel_tot = 0.0;
    in.p_bo.pop_back();
    CHECK_THROWS_AS(backoff_model(in), std::invalid_argument);
}
