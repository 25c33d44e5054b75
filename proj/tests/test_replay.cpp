#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "disrc/replay.hpp"

using namespace disrc;

namespace {

Transition tagged(double tag) {
  Transition t;
  t.obs = {tag};
  t.next_obs = {tag};
  t.reward = tag;
  return t;
}

}  // namespace

TEST_SUITE("replay") {

TEST_CASE("push grows until capacity then evicts FIFO") {
  ReplayBuffer buf(3);
  CHECK(buf.size() == 0);
  buf.push(tagged(1));
  CHECK(buf.size() == 1);
  for (double tag : {2.0, 3.0, 4.0, 5.0}) buf.push(tagged(tag));
  CHECK(buf.size() == 3);
  // items 3, 4, 5 survive
  std::vector<double> live;
  for (std::size_t i = 0; i < buf.size(); ++i) live.push_back(buf[i].reward);
  std::sort(live.begin(), live.end());
  CHECK(live == std::vector<double>{3.0, 4.0, 5.0});
}

TEST_CASE("first n pushes are stored verbatim") {
  ReplayBuffer buf(10);
  for (int i = 0; i < 6; ++i) buf.push(tagged(i));
  for (int i = 0; i < 6; ++i) CHECK(buf[i].reward == i);
}

TEST_CASE("sampling below batch size signals insufficient data") {
  ReplayBuffer buf(1000);
  Rng rng(1);
  for (int i = 0; i < 127; ++i) buf.push(tagged(i));
  CHECK_FALSE(buf.sample(128, rng).has_value());
  buf.push(tagged(127));
  CHECK(buf.sample(128, rng).has_value());
}

TEST_CASE("sampling is deterministic under a fixed seed") {
  ReplayBuffer buf(100);
  for (int i = 0; i < 100; ++i) buf.push(tagged(i));
  Rng r1(42), r2(42);
  const auto a = buf.sample(32, r1);
  const auto b = buf.sample(32, r2);
  REQUIRE(a);
  REQUIRE(b);
  for (std::size_t i = 0; i < a->size(); ++i)
    CHECK((*a)[i]->reward == (*b)[i]->reward);
}

TEST_CASE("sampled frequencies are uniform within 4 sigma") {
  ReplayBuffer buf(2000);
  for (int i = 0; i < 1000; ++i) buf.push(tagged(i));
  Rng rng(2718);
  std::vector<int> counts(1000, 0);
  const int draws = 100000;
  int done_draws = 0;
  while (done_draws < draws) {
    const auto batch = buf.sample(100, rng);
    REQUIRE(batch);
    for (const Transition* t : *batch)
      counts[static_cast<int>(t->reward)]++;
    done_draws += 100;
  }
  // binomial: mean 100, sigma = sqrt(n p (1-p)) ~ 9.995
  const double expected = draws / 1000.0;
  const double sigma = std::sqrt(draws * (1.0 / 1000.0) * (999.0 / 1000.0));
  for (int c : counts) CHECK(std::abs(c - expected) <= 4.0 * sigma);
  // chi-square against uniform: mean 999, sigma sqrt(2*999)
  double chi2 = 0.0;
  for (int c : counts) chi2 += (c - expected) * (c - expected) / expected;
  CHECK(chi2 < 999.0 + 4.0 * std::sqrt(2.0 * 999.0));
}

TEST_CASE("samples only address live slots") {
  ReplayBuffer buf(8);
  Rng rng(5);
  for (int i = 0; i < 100; ++i) {
    buf.push(tagged(i));
    if (auto batch = buf.sample(4, rng)) {
      for (const Transition* t : *batch) {
        // live window is the last min(i+1, 8) tags
        CHECK(t->reward >= std::max(0, i - 7));
        CHECK(t->reward <= i);
      }
    }
  }
}

TEST_CASE("zero capacity is rejected") {
  CHECK_THROWS_AS(ReplayBuffer(0), std::invalid_argument);
}

}  // TEST_SUITE
