#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "qlearn/errors.hpp"
#include "qlearn/simulator.hpp"
#include "support.hpp"

using namespace qlearn;
using qtest::eq7;

namespace {

SimConfig config(QMatrix q, DinaParams params, std::size_t n, std::uint64_t seed) {
  const int k = q.attributes();
  return SimConfig{std::move(q), ProfileDistribution::uniform(k), std::move(params), n, seed};
}

double three_sigma(double p, std::size_t n) { return 3.0 * std::sqrt(p * (1.0 - p) / static_cast<double>(n)); }

}  // namespace

TEST_CASE("SplitMix64 reference output") {
  SplitMix64 s(0);
  CHECK(s.next() == 0xE220A8397B1DCDAFULL);
  CHECK(s.next() == 0x6E789E6AA1B965F4ULL);
}

TEST_CASE("profile draws") {
  SimConfig cfg = config(eq7(), DinaParams::noiseless(3), 1000, 1);
  cfg.p_star = ProfileDistribution::point_mass(2, AttributeProfile{0b11});
  for (auto p : sample_profiles(cfg)) CHECK(p.bits == 0b11);

  cfg = config(eq7(), DinaParams::noiseless(3), 100000, 2);
  std::vector<std::size_t> counts(4, 0);
  for (auto p : sample_profiles(cfg)) ++counts[p.bits];
  for (auto c : counts) CHECK(std::abs(static_cast<double>(c) / 1e5 - 0.25) <= three_sigma(0.25, 100000));

  const auto a = sample_profiles(cfg);
  CHECK(a == sample_profiles(cfg));
  cfg.seed = 3;
  CHECK_FALSE(a == sample_profiles(cfg));
}

TEST_CASE("streams are stable when N grows") {
  SimConfig small = config(eq7(), DinaParams::uniform(3, 0.8, 0.2), 100, 17);
  SimConfig large = small;
  large.n = 250;
  const auto s = simulate(small), l = simulate(large);
  for (std::size_t r = 0; r < 100; ++r) {
    CHECK(s.profiles[r] == l.profiles[r]);
    CHECK(s.responses.rows[r] == l.responses.rows[r]);
  }
}

TEST_CASE("noiseless responses equal capability") {
  const auto out = simulate(config(eq7(), DinaParams::noiseless(3), 2000, 5));
  for (std::size_t r = 0; r < out.profiles.size(); ++r)
    for (int i = 0; i < 3; ++i)
      CHECK((((out.responses.rows[r] >> i) & 1U) != 0) == capability(out.profiles[r], eq7(), i));
}

TEST_CASE("item marginals") {
  const std::size_t n = 100000;
  auto flat = simulate(config(eq7(), DinaParams::uniform(3, 0.5, 0.5), n, 6));
  for (int i = 0; i < 3; ++i) {
    std::size_t pos = 0;
    for (Mask r : flat.responses.rows) pos += (r >> i) & 1U;
    CHECK(std::abs(static_cast<double>(pos) / n - 0.5) <= three_sigma(0.5, n));
  }
  auto dina = simulate(config(eq7(), DinaParams::uniform(3, 0.8, 0.2), n, 7));
  std::size_t pos = 0;
  for (Mask r : dina.responses.rows) pos += r & 1U;
  CHECK(std::abs(static_cast<double>(pos) / n - 0.5) <= three_sigma(0.5, n));

  qtest::Gen gen(8);
  for (int t = 0; t < 10; ++t) {
    const int k = gen.integer(1, 3), m = gen.integer(1, 5);
    SimConfig cfg{gen.q(m, k), gen.distribution(k),
                  DinaParams{gen.vec(static_cast<std::size_t>(m), 0.5, 1.0), gen.vec(static_cast<std::size_t>(m), 0.0, 0.5)},
                  50000, static_cast<std::uint64_t>(100 + t)};
    const auto out = simulate(cfg);
    for (int i = 0; i < m; ++i) {
      std::size_t c = 0;
      for (Mask r : out.responses.rows) c += (r >> i) & 1U;
      const double want = qtest::expected_rate(cfg.q, cfg.params, cfg.p_star, Mask{1} << i);
      CHECK(std::abs(static_cast<double>(c) / 50000.0 - want) <= three_sigma(want, 50000) + 1e-12);
    }
  }
}

TEST_CASE("alpha identities on noiseless data") {
  const auto out = simulate(config(eq7(), DinaParams::noiseless(3), 3000, 9));
  const auto order = ComboOrder::saturated(3);
  const AlphaVector alpha = compute_alpha(out.responses, order);
  std::vector<double> counts(4, 0.0);
  for (auto p : out.profiles) counts[p.bits] += 1.0;
  const double n = 3000.0;
  CHECK(alpha.rates(order.index_of(ItemCombo{0b011})) * n == doctest::Approx(counts[3]));
  CHECK(alpha.rates(order.index_of(ItemCombo{0b100})) * n == doctest::Approx(counts[3]));
  CHECK(alpha.n_subjects == 3000);

  // T(Q) p_hat = alpha with p_hat the empirical profile frequencies.
  const auto profiles = profile_order(2);
  Eigen::VectorXd p_hat(3);
  for (std::size_t a = 0; a < 3; ++a) p_hat(static_cast<Eigen::Index>(a)) = counts[profiles[a].bits] / n;
  CHECK((build_T(eq7(), order).values * p_hat - alpha.rates).cwiseAbs().maxCoeff() <= 1e-12);

  ResponseData zeros{3, std::vector<Mask>(10, 0)};
  CHECK(compute_alpha(zeros, order).rates.isZero());
}

TEST_CASE("alpha is monotone under combo refinement and matches its expectation") {
  qtest::Gen gen(10);
  for (int t = 0; t < 5; ++t) {
    const int m = gen.integer(2, 5), k = gen.integer(1, 3);
    SimConfig cfg{gen.q(m, k), gen.distribution(k),
                  DinaParams{gen.vec(static_cast<std::size_t>(m), 0.6, 1.0), gen.vec(static_cast<std::size_t>(m), 0.0, 0.4)},
                  100000, static_cast<std::uint64_t>(t)};
    const auto order = ComboOrder::saturated(m);
    const AlphaVector alpha = compute_alpha(simulate(cfg).responses, order);
    for (std::size_t s = 0; s < order.size(); ++s) {
      const double rate = alpha.rates(static_cast<Eigen::Index>(s));
      const double want = qtest::expected_rate(cfg.q, cfg.params, cfg.p_star, order[s].bits);
      CHECK(std::abs(rate - want) <= three_sigma(want, cfg.n) + 1e-12);
      for (std::size_t u = 0; u < order.size(); ++u)
        if ((order[u].bits & order[s].bits) == order[s].bits)
          CHECK(alpha.rates(static_cast<Eigen::Index>(u)) <= rate);
    }
  }
}

TEST_CASE("response and profile files round trip") {
  const auto out = simulate(config(eq7(), DinaParams::uniform(3, 0.8, 0.2), 50, 11));
  const std::string text = format_responses(out.responses);
  CHECK(text.rfind("m=3\n", 0) == 0);
  const ResponseData back = parse_responses(text);
  CHECK(back.items == 3);
  CHECK(back.rows == out.responses.rows);
  CHECK(format_responses(back) == text);
  CHECK(parse_profiles(format_profiles(out.profiles, 2), 2) == out.profiles);

  CHECK_THROWS_AS(parse_responses("101\n"), ValidationError);
  CHECK_THROWS_AS(parse_responses("m=3\n10\n"), ValidationError);
  CHECK_THROWS_AS(parse_responses("m=3\n1a1\n"), ValidationError);
  CHECK_THROWS_AS(parse_responses("m=3\n"), ValidationError);
}

TEST_CASE("config validation") {
  SimConfig cfg = config(eq7(), DinaParams::noiseless(3), 10, 1);
  cfg.p_star.probs = {0.3, 0.3, 0.3, 0.3};
  try {
    (void)cfg.validate();
    FAIL("expected a validation error");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("1.2") != std::string::npos);
  }
  cfg.p_star = ProfileDistribution::point_mass(2, AttributeProfile{0b11});
  CHECK(cfg.validate().size() == 1);
  cfg.n = 0;
  CHECK_THROWS_AS((void)cfg.validate(), ValidationError);
  cfg.n = 10;
  cfg.params.c = {1.0, 1.5, 1.0};
  CHECK_THROWS_AS((void)cfg.validate(), ValidationError);
}

TEST_CASE("item selection keeps responses aligned") {
  ResponseData d{4, {0b1010, 0b0101}};
  const std::vector<int> items{3, 1};
  const ResponseData s = d.select_items(items);
  CHECK(s.items == 2);
  CHECK(s.rows == std::vector<Mask>{0b11, 0b00});
}
