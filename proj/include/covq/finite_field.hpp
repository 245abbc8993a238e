#pragma once

// Arithmetic in GF(p^(e*ell)) viewed as ell symbols of GF(p^e), the hash
// family f_u(v) = first k symbols of u * v, and its preimage codebooks.
//
// Representation: a field element is its coefficient vector over GF(p),
// little-endian, reduced modulo a monic irreducible of degree e*ell.
// Symbol i is the coefficient block [i*e, (i+1)*e), read as the integer
// sum_j c_(i*e+j) p^j in [0, p^e).

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace covq {

using Poly = std::vector<int>;           // little-endian coefficients over GF(p)
using FieldElement = std::vector<int>;   // exactly degree() coefficients
using SymbolVector = std::vector<int>;   // ell symbols, each in [0, p^e)

bool is_prime(int n);

// Monic, degree `degree`, irreducible over GF(p). Candidates are visited in
// order of the little-endian integer formed by the lower coefficients, so the
// result is reproducible. Degree must lie in [1, 24].
Poly find_irreducible(int p, int degree);

// Rabin/Ben-Or test: gcd(f, x^(p^i) - x) = 1 for i <= deg/2.
bool is_irreducible(const Poly& f, int p);

// Trial division by every monic polynomial of degree <= deg/2.
bool is_irreducible_exhaustive(const Poly& f, int p);

class FieldSpec {
 public:
  // Searches for the modulus with find_irreducible.
  FieldSpec(int p, int e, int ell);
  // Uses the given modulus after checking it.
  FieldSpec(int p, int e, int ell, Poly modulus);

  int characteristic() const noexcept { return p_; }
  int extension() const noexcept { return e_; }
  int length() const noexcept { return ell_; }
  int degree() const noexcept { return e_ * ell_; }
  int symbol_size() const noexcept { return symbol_size_; }  // m_v = p^e
  std::uint64_t order() const noexcept { return order_; }      // m_v^ell
  const Poly& modulus() const noexcept { return modulus_; }

  FieldElement zero() const;
  FieldElement one() const;
  bool is_zero(const FieldElement& a) const;

  FieldElement add(const FieldElement& a, const FieldElement& b) const;
  FieldElement sub(const FieldElement& a, const FieldElement& b) const;
  FieldElement mul(const FieldElement& a, const FieldElement& b) const;
  FieldElement inv(const FieldElement& a) const;

  SymbolVector to_symbols(const FieldElement& a) const;
  FieldElement from_symbols(const SymbolVector& s) const;

  // Little-endian integer of the coefficient vector, in [0, order()).
  std::uint64_t index_of(const FieldElement& a) const;
  FieldElement element_at(std::uint64_t index) const;

  bool operator==(const FieldSpec& other) const = default;

 private:
  void validate() const;
  void check_element(const FieldElement& a) const;

  int p_;
  int e_;
  int ell_;
  int symbol_size_;
  std::uint64_t order_;
  Poly modulus_;
};

struct HashFunction {
  FieldSpec field;
  FieldElement u;  // nonzero
  int k;           // output symbols, 1 <= k <= ell
};

HashFunction make_hash(const FieldSpec& field, FieldElement u, int k);

// First k symbols of u * v.
SymbolVector hash_eval(const HashFunction& f, const SymbolVector& v);

struct HashCodebook {
  HashFunction f;
  SymbolVector z;                       // k symbols
  std::vector<SymbolVector> codewords;  // sorted lexicographically; g(r) = codewords[r]
  std::uint64_t h() const noexcept { return codewords.size(); }
};

// f^-1(z) = {(z | r) * u^-1 : r in V^(ell-k)}, exactly m_v^(ell-k) elements.
HashCodebook preimage(const HashFunction& f, const SymbolVector& z);

// All of V^ell in lexicographic order; the k = 0 limit of preimage.
std::vector<SymbolVector> full_codebook(const FieldSpec& field);

// Every nonzero u, ordered by index.
std::vector<HashFunction> hash_family(const FieldSpec& field, int k);

struct UniversalityReport {
  double max_collision = 0.0;  // max over distinct pairs of Pr_f[f(x) = f(x')]
  double bound = 0.0;          // 1 / |Z|
  bool regular = false;        // every f has equal-size preimages over all of Z
  bool universal = false;      // max_collision <= bound + 1e-15
  bool pass() const noexcept { return regular && universal; }
};

using SymbolMap = std::function<SymbolVector(const SymbolVector&)>;

// Exhaustive check over V^ell with |V| = symbol_size; needs |V|^ell <= 4096.
UniversalityReport verify_two_universal(const std::vector<SymbolMap>& family, int symbol_size, int ell,
                                        int output_symbols);
UniversalityReport verify_two_universal(const FieldSpec& field, int k);

struct CodebookSize {
  int k;
  std::uint64_t h;
};

// Smallest h = m_v^(ell-k) >= requested with 1 <= k <= ell.
CodebookSize codebook_size_for(const FieldSpec& field, std::uint64_t requested);

// Line-oriented text: header keys p, e, ell, k, modulus, u, z, h, then one
// codeword per line as space-separated symbol digits.
void write_codebook(std::ostream& out, const HashCodebook& cb);
HashCodebook read_codebook(std::istream& in);

}  // namespace covq
