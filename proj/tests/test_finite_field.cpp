#include <algorithm>
#include <set>
#include <sstream>

#include "doctest.h"

#include "covq/errors.hpp"
#include "covq/finite_field.hpp"

using namespace covq;

namespace {

// Brute-force irreducibility: no roots and no factor among all monic
// polynomials of degree <= deg/2, by explicit long division.
bool divides(Poly g, Poly f, int p) {
  while (f.size() >= g.size()) {
    const int lead = f.back();
    const std::size_t shift = f.size() - g.size();
    for (std::size_t i = 0; i < g.size(); ++i) f[shift + i] = ((f[shift + i] - lead * g[i]) % p + p) % p;
    while (!f.empty() && f.back() == 0) f.pop_back();
  }
  return f.empty();
}

}  // namespace

TEST_CASE("irreducible search") {
  CHECK(find_irreducible(2, 1) == Poly{0, 1});
  CHECK(find_irreducible(2, 2) == Poly{1, 1, 1});
  CHECK(find_irreducible(3, 2) == Poly{1, 0, 1});
  // x^2 + x + 1 is the only irreducible monic quadratic over GF(2)
  int count = 0;
  for (int c0 = 0; c0 < 2; ++c0)
    for (int c1 = 0; c1 < 2; ++c1) count += is_irreducible(Poly{c0, c1, 1}, 2) ? 1 : 0;
  CHECK(count == 1);
  for (int degree = 1; degree <= 8; ++degree) {
    const Poly f = find_irreducible(2, degree);
    CHECK(is_irreducible_exhaustive(f, 2));
    CHECK(is_irreducible(f, 2));
  }
  CHECK_FALSE(is_irreducible(Poly{1, 0, 1}, 2));  // (x+1)^2
  CHECK(is_prime(7));
  CHECK_FALSE(is_prime(9));
  CHECK_THROWS_AS(find_irreducible(4, 2), ValidationError);
}

TEST_CASE("Ben-Or and trial division agree") {
  for (int p : {2, 3}) {
    for (int degree = 2; degree <= 4; ++degree) {
      int total = 1;
      for (int i = 0; i < degree; ++i) total *= p;
      for (int code = 0; code < total; ++code) {
        Poly f(static_cast<std::size_t>(degree + 1), 0);
        int c = code;
        for (int i = 0; i < degree; ++i) {
          f[i] = c % p;
          c /= p;
        }
        f[degree] = 1;
        bool reducible = false;
        for (int gd = 1; gd <= degree / 2 && !reducible; ++gd) {
          int gtotal = 1;
          for (int i = 0; i < gd; ++i) gtotal *= p;
          for (int gc = 0; gc < gtotal && !reducible; ++gc) {
            Poly g(static_cast<std::size_t>(gd + 1), 0);
            int x = gc;
            for (int i = 0; i < gd; ++i) {
              g[i] = x % p;
              x /= p;
            }
            g[gd] = 1;
            reducible = divides(g, f, p);
          }
        }
        CHECK(is_irreducible(f, p) == !reducible);
        CHECK(is_irreducible_exhaustive(f, p) == !reducible);
      }
    }
  }
}

TEST_CASE("field axioms, GF(8) exhaustive") {
  const FieldSpec f(2, 1, 3);
  CHECK(f.order() == 8);
  for (std::uint64_t i = 0; i < 8; ++i) {
    const FieldElement a = f.element_at(i);
    CHECK(f.index_of(a) == i);
    CHECK(f.add(a, a) == f.zero());
    if (!f.is_zero(a)) CHECK(f.mul(a, f.inv(a)) == f.one());
    for (std::uint64_t j = 0; j < 8; ++j) {
      const FieldElement b = f.element_at(j);
      CHECK(f.mul(a, b) == f.mul(b, a));
      const FieldElement s = f.add(a, b);
      for (std::size_t c = 0; c < s.size(); ++c) CHECK(s[c] == (a[c] + b[c]) % 2);
      for (std::uint64_t k = 0; k < 8; ++k) {
        const FieldElement c = f.element_at(k);
        CHECK(f.mul(f.mul(a, b), c) == f.mul(a, f.mul(b, c)));
        CHECK(f.mul(a, f.add(b, c)) == f.add(f.mul(a, b), f.mul(a, c)));
      }
    }
  }
  CHECK_THROWS_AS(f.inv(f.zero()), ValidationError);
}

TEST_CASE("GF(4) multiplication is the field of order 4") {
  const FieldSpec f(2, 2, 1);
  CHECK(f.symbol_size() == 4);
  // x^2 = x + 1 with elements c0 + c1 x
  for (std::uint64_t i = 0; i < 4; ++i)
    for (std::uint64_t j = 0; j < 4; ++j) {
      const FieldElement a = f.element_at(i), b = f.element_at(j);
      const int c0 = (a[0] * b[0] + a[1] * b[1]) % 2;
      const int c1 = (a[0] * b[1] + a[1] * b[0] + a[1] * b[1]) % 2;
      CHECK(f.mul(a, b) == FieldElement{c0, c1});
    }
  // multiplicative group is cyclic of order 3
  const FieldElement x = f.element_at(2);
  CHECK(f.mul(x, x) != f.one());
  CHECK(f.mul(f.mul(x, x), x) == f.one());
}

TEST_CASE("GF(9) as length-2 vectors over GF(3): symbols and digit-wise addition") {
  const FieldSpec f(3, 1, 2);
  for (std::uint64_t i = 0; i < 9; ++i) {
    const SymbolVector s = f.to_symbols(f.element_at(i));
    CHECK(f.from_symbols(s) == f.element_at(i));
    for (std::uint64_t j = 0; j < 9; ++j) {
      const SymbolVector t = f.to_symbols(f.element_at(j));
      const SymbolVector sum = f.to_symbols(f.add(f.element_at(i), f.element_at(j)));
      for (int c = 0; c < 2; ++c) CHECK(sum[c] == (s[c] + t[c]) % 3);
    }
  }
  CHECK_THROWS_AS(f.from_symbols({0, 3}), ValidationError);
  CHECK_THROWS_AS(f.from_symbols({0}), DimensionError);
}

TEST_CASE("hash evaluation") {
  const FieldSpec f(2, 1, 3);
  const HashFunction id = make_hash(f, f.one(), 3);
  for (const SymbolVector& v : full_codebook(f)) CHECK(hash_eval(id, v) == v);
  for (const HashFunction& h : hash_family(f, 2)) CHECK(hash_eval(h, {0, 0, 0}) == SymbolVector{0, 0});
  CHECK_THROWS_AS(make_hash(f, f.zero(), 1), ValidationError);
  CHECK_THROWS_AS(make_hash(f, f.one(), 4), ValidationError);
  CHECK_THROWS_AS(hash_eval(id, {1, 0}), DimensionError);

  // GF(4) = GF(2)^2 with modulus x^2 + x + 1, all u and v by hand
  const FieldSpec g(2, 1, 2);
  for (int u = 1; u < 4; ++u)
    for (int v = 0; v < 4; ++v) {
      const int a0 = u & 1, a1 = u >> 1, b0 = v & 1, b1 = v >> 1;
      const int c0 = (a0 * b0 + a1 * b1) % 2;
      const int c1 = (a0 * b1 + a1 * b0 + a1 * b1) % 2;
      CHECK(hash_eval(make_hash(g, g.element_at(u), 2), {b0, b1}) == SymbolVector{c0, c1});
      CHECK(hash_eval(make_hash(g, g.element_at(u), 1), {b0, b1}) == SymbolVector{c0});
    }
}

TEST_CASE("preimage codebooks are regular and canonical") {
  const FieldSpec f(2, 1, 3);
  for (const HashFunction& h : hash_family(f, 1))
    for (int z = 0; z < 2; ++z) {
      const HashCodebook cb = preimage(h, {z});
      CHECK(cb.h() == 4);
      CHECK(std::is_sorted(cb.codewords.begin(), cb.codewords.end()));
      CHECK(std::set<SymbolVector>(cb.codewords.begin(), cb.codewords.end()).size() == 4);
      for (const SymbolVector& w : cb.codewords) CHECK(hash_eval(h, w) == SymbolVector{z});
    }
  const HashCodebook single = preimage(make_hash(f, f.element_at(5), 3), {1, 0, 1});
  CHECK(single.h() == 1);
  CHECK(preimage(make_hash(f, f.element_at(5), 3), {1, 0, 1}).codewords == single.codewords);
}

TEST_CASE("regularity and two-universality, exhaustive") {
  for (const auto& [p, e, ell] : {std::tuple{2, 1, 2}, std::tuple{2, 1, 3}, std::tuple{3, 1, 2}, std::tuple{2, 2, 2}}) {
    const FieldSpec f(p, e, ell);
    for (int k = 1; k <= ell; ++k) {
      const UniversalityReport r = verify_two_universal(f, k);
      CHECK(r.regular);
      CHECK(r.universal);
      CHECK(r.max_collision <= r.bound + 1e-15);
    }
  }
  const std::vector<SymbolMap> constant{[](const SymbolVector&) { return SymbolVector{0}; }};
  const UniversalityReport bad = verify_two_universal(constant, 2, 2, 1);
  CHECK_FALSE(bad.pass());
  CHECK(bad.max_collision == 1.0);
}

TEST_CASE("affine symmetry maps one preimage onto another") {
  for (const auto& [p, ell] : {std::pair{2, 3}, std::pair{3, 2}}) {
    const FieldSpec f(p, 1, ell);
    const int k = 1;
    for (const HashFunction& h : hash_family(f, k)) {
      const FieldElement u_inv = f.inv(h.u);
      for (int z = 0; z < p; ++z)
        for (int zp = 0; zp < p; ++zp) {
          SymbolVector shift(static_cast<std::size_t>(ell), 0);
          shift[0] = ((zp - z) % p + p) % p;
          const FieldElement t = f.mul(f.from_symbols(shift), u_inv);
          std::vector<SymbolVector> image;
          for (const SymbolVector& w : preimage(h, {z}).codewords) image.push_back(f.to_symbols(f.add(t, f.from_symbols(w))));
          std::sort(image.begin(), image.end());
          CHECK(image == preimage(h, {zp}).codewords);
        }
    }
  }
}

TEST_CASE("codebook sizing and serialization") {
  const FieldSpec f(2, 1, 3);
  CHECK(codebook_size_for(f, 1).h == 1);
  CHECK(codebook_size_for(f, 1).k == 3);
  CHECK(codebook_size_for(f, 3).h == 4);
  CHECK(codebook_size_for(f, 3).k == 1);
  CHECK_THROWS_AS(codebook_size_for(f, 5), ValidationError);

  const HashCodebook cb = preimage(make_hash(f, f.element_at(6), 1), {1});
  std::stringstream ss;
  write_codebook(ss, cb);
  const std::string text = ss.str();
  const HashCodebook back = read_codebook(ss);
  CHECK(back.codewords == cb.codewords);
  CHECK(back.z == cb.z);
  CHECK(back.f.u == cb.f.u);

  std::stringstream again;
  write_codebook(again, back);
  CHECK(again.str() == text);

  // flip one symbol of the last codeword
  std::string broken = text;
  const auto pos = broken.find_last_of("01");
  broken[pos] = broken[pos] == '0' ? '1' : '0';
  std::stringstream bad(broken);
  CHECK_THROWS_AS(read_codebook(bad), ValidationError);
}

TEST_CASE("field validation") {
  CHECK_THROWS_AS(FieldSpec(4, 1, 2), ValidationError);
  CHECK_THROWS_AS(FieldSpec(2, 1, 2, Poly{1, 0, 1}), ValidationError);
  CHECK_THROWS_AS(FieldSpec(2, 1, 25), ValidationError);
  CHECK(FieldSpec(2, 1, 3) == FieldSpec(2, 1, 3));
}
