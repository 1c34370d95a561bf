#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <vector>

#include "mgtd/hash.hpp"
#include "mgtd/rng.hpp"
#include "mgtd/unicode.hpp"

using namespace mgtd;

TEST_CASE("splitmix64 reference outputs for seed 0") {
  SplitMix64 rng(0);
  CHECK(rng.next() == 0xE220A8397B1DCDAFULL);
  CHECK(rng.next() == 0x6E789E6AA1B965F4ULL);
  CHECK(rng.next() == 0x06C45D188009454FULL);
}

TEST_CASE("uniform stays in [0,1) and below(n) in range") {
  SplitMix64 rng(5);
  for (int i = 0; i < 10000; ++i) {
    const double u = rng.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    CHECK(rng.below(7) < 7u);
  }
}

TEST_CASE("stream seeds separate index and salt") {
  CHECK(stream_seed(1, 0) != stream_seed(1, 1));
  CHECK(stream_seed(1, 0, 1) != stream_seed(1, 0, 2));
  CHECK(stream_seed(9, 4, 3) == stream_seed(9, 4, 3));
}

TEST_CASE("shuffle is a seeded permutation") {
  std::vector<int> a(50);
  std::iota(a.begin(), a.end(), 0);
  std::vector<int> b(a);
  SplitMix64 r1(3), r2(3);
  shuffle(std::span<int>(a), r1);
  shuffle(std::span<int>(b), r2);
  CHECK(a == b);
  std::vector<int> sorted = a;
  std::sort(sorted.begin(), sorted.end());
  std::vector<int> expect(50);
  std::iota(expect.begin(), expect.end(), 0);
  CHECK(sorted == expect);
}

TEST_CASE("fnv1a64 reference vectors") {
  CHECK(fnv1a64("") == 0xCBF29CE484222325ULL);
  CHECK(fnv1a64("a") == 0xAF63DC4C8601EC8CULL);
  CHECK(fnv1a64("foobar") == 0x85944171F73967E8ULL);
  CHECK(hex64(0xAF63DC4C8601EC8CULL) == "af63dc4c8601ec8c");
  CHECK(hex64(1) == "0000000000000001");
}

TEST_CASE("utf8 decode and encode") {
  const std::string s = "aé€😀";
  const auto cps = unicode::decode(s);
  REQUIRE(cps.size() == 4);
  CHECK(cps[1] == U'é');
  CHECK(cps[3] == U'\U0001F600');
  CHECK(unicode::encode(cps) == s);
  CHECK(unicode::decode("a\xFF" "b") == std::u32string{U'a', U'�', U'b'});
  CHECK(unicode::length(s) == 4);
}

TEST_CASE("nfc composes and lower maps accents") {
  CHECK(unicode::nfc("e\xCC\x81") == "é");
  CHECK(unicode::lower("ÉCOLE Été") == "école été");
  CHECK(unicode::lower("ΑΒΓ") == "αβγ");
}

TEST_CASE("whitespace helpers") {
  const auto toks = unicode::split_whitespace("  un\tdeux trois\n");
  CHECK(toks == std::vector<std::string>{"un", "deux", "trois"});
  CHECK(unicode::collapse_whitespace("  a \n\n b\t") == "a b");
  CHECK(unicode::trim("  x y \n") == "x y");
  CHECK(unicode::is_upper(U'É'));
  CHECK(unicode::is_digit(U'7'));
  CHECK_FALSE(unicode::is_alpha(U'-'));
}
