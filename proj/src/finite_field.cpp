#include "covq/finite_field.hpp"

#include <algorithm>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <unordered_map>

#include "covq/errors.hpp"

namespace covq {

namespace {

int mod(long long a, int p) {
  const long long r = a % p;
  return static_cast<int>(r < 0 ? r + p : r);
}

int inverse_mod(int a, int p) {
  // p is prime; Fermat.
  long long result = 1, base = mod(a, p);
  for (int exp = p - 2; exp > 0; exp >>= 1) {
    if (exp & 1) result = result * base % p;
    base = base * base % p;
  }
  return static_cast<int>(result);
}

void trim(Poly& a) {
  while (!a.empty() && a.back() == 0) a.pop_back();
}

int deg(const Poly& a) { return static_cast<int>(a.size()) - 1; }

// Remainder of a modulo a nonzero b.
Poly poly_mod(Poly a, const Poly& b, int p) {
  trim(a);
  const int db = deg(b);
  const int lead_inv = inverse_mod(b.back(), p);
  while (deg(a) >= db) {
    const int shift = deg(a) - db;
    const int factor = static_cast<int>(static_cast<long long>(a.back()) * lead_inv % p);
    for (int i = 0; i <= db; ++i) a[i + shift] = mod(a[i + shift] - static_cast<long long>(factor) * b[i], p);
    trim(a);
  }
  return a;
}

Poly poly_mul(const Poly& a, const Poly& b, int p) {
  if (a.empty() || b.empty()) return {};
  std::vector<long long> acc(a.size() + b.size() - 1, 0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] == 0) continue;
    for (std::size_t j = 0; j < b.size(); ++j) acc[i + j] += static_cast<long long>(a[i]) * b[j];
  }
  Poly out(acc.size());
  for (std::size_t i = 0; i < acc.size(); ++i) out[i] = mod(acc[i], p);
  trim(out);
  return out;
}

Poly poly_sub(Poly a, const Poly& b, int p) {
  if (a.size() < b.size()) a.resize(b.size(), 0);
  for (std::size_t i = 0; i < b.size(); ++i) a[i] = mod(static_cast<long long>(a[i]) - b[i], p);
  trim(a);
  return a;
}

Poly poly_gcd(Poly a, Poly b, int p) {
  trim(a);
  trim(b);
  while (!b.empty()) {
    Poly r = poly_mod(a, b, p);
    a = std::move(b);
    b = std::move(r);
  }
  return a;
}

Poly poly_powmod(Poly base, std::uint64_t exp, const Poly& m, int p) {
  Poly result{1};
  base = poly_mod(std::move(base), m, p);
  while (exp > 0) {
    if (exp & 1) result = poly_mod(poly_mul(result, base, p), m, p);
    base = poly_mod(poly_mul(base, base, p), m, p);
    exp >>= 1;
  }
  return result;
}

std::uint64_t ipow(std::uint64_t b, int e) {
  std::uint64_t r = 1;
  for (int i = 0; i < e; ++i) r *= b;
  return r;
}

bool is_monic_over(const Poly& f, int p) {
  if (f.size() < 2 || f.back() != 1) return false;
  return std::all_of(f.begin(), f.end(), [p](int c) { return c >= 0 && c < p; });
}

}  // namespace

bool is_prime(int n) {
  if (n < 2) return false;
  for (int d = 2; static_cast<long long>(d) * d <= n; ++d)
    if (n % d == 0) return false;
  return true;
}

bool is_irreducible(const Poly& f, int p) {
  if (!is_prime(p)) throw ValidationError("characteristic must be prime");
  if (!is_monic_over(f, p)) throw ValidationError("polynomial must be monic with coefficients in [0, p)");
  const int n = deg(f);
  if (n == 1) return true;
  Poly xp{0, 1};  // x^(p^i) mod f
  for (int i = 1; i <= n / 2; ++i) {
    xp = poly_powmod(xp, static_cast<std::uint64_t>(p), f, p);
    const Poly g = poly_gcd(f, poly_sub(xp, Poly{0, 1}, p), p);
    if (deg(g) > 0) return false;
  }
  return true;
}

bool is_irreducible_exhaustive(const Poly& f, int p) {
  if (!is_prime(p)) throw ValidationError("characteristic must be prime");
  if (!is_monic_over(f, p)) throw ValidationError("polynomial must be monic with coefficients in [0, p)");
  const int n = deg(f);
  for (int dd = 1; dd <= n / 2; ++dd) {
    const std::uint64_t count = ipow(static_cast<std::uint64_t>(p), dd);
    for (std::uint64_t t = 0; t < count; ++t) {
      Poly g(static_cast<std::size_t>(dd) + 1);
      std::uint64_t rem = t;
      for (int i = 0; i < dd; ++i) {
        g[i] = static_cast<int>(rem % p);
        rem /= p;
      }
      g[dd] = 1;
      if (poly_mod(f, g, p).empty()) return false;
    }
  }
  return true;
}

Poly find_irreducible(int p, int degree) {
  if (!is_prime(p)) throw ValidationError("characteristic must be prime");
  if (degree < 1 || degree > 24) throw ValidationError("irreducible search supports degrees 1..24");
  const std::uint64_t count = ipow(static_cast<std::uint64_t>(p), degree);
  for (std::uint64_t t = 0; t < count; ++t) {
    Poly f(static_cast<std::size_t>(degree) + 1);
    std::uint64_t rem = t;
    for (int i = 0; i < degree; ++i) {
      f[i] = static_cast<int>(rem % p);
      rem /= p;
    }
    f[degree] = 1;
    if (is_irreducible(f, p)) return f;
  }
  throw InvariantError("no irreducible polynomial found");  // unreachable: one exists for every degree
}

FieldSpec::FieldSpec(int p, int e, int ell) : FieldSpec(p, e, ell, Poly{}) {}

FieldSpec::FieldSpec(int p, int e, int ell, Poly modulus) : p_(p), e_(e), ell_(ell), modulus_(std::move(modulus)) {
  if (!is_prime(p_)) throw ValidationError("field characteristic must be prime");
  if (e_ < 1 || ell_ < 1) throw ValidationError("extension degree and length must be at least 1");
  if (e_ * ell_ > 24) throw ValidationError("field degree e*ell must not exceed 24");
  symbol_size_ = static_cast<int>(ipow(static_cast<std::uint64_t>(p_), e_));
  order_ = ipow(static_cast<std::uint64_t>(p_), e_ * ell_);
  if (modulus_.empty()) modulus_ = find_irreducible(p_, degree());
  validate();
}

void FieldSpec::validate() const {
  if (deg(modulus_) != degree()) throw ValidationError("modulus degree must equal e*ell");
  if (!is_irreducible(modulus_, p_)) throw ValidationError("modulus is reducible");
  // Exhaustive confirmation while the divisor search stays small.
  if (ipow(static_cast<std::uint64_t>(p_), degree() / 2) <= (1u << 16) && !is_irreducible_exhaustive(modulus_, p_))
    throw InvariantError("modulus failed exhaustive irreducibility check");
}

void FieldSpec::check_element(const FieldElement& a) const {
  if (static_cast<int>(a.size()) != degree()) throw DimensionError("field element has the wrong length");
}

FieldElement FieldSpec::zero() const { return FieldElement(static_cast<std::size_t>(degree()), 0); }

FieldElement FieldSpec::one() const {
  FieldElement a = zero();
  a[0] = 1;
  return a;
}

bool FieldSpec::is_zero(const FieldElement& a) const {
  check_element(a);
  return std::all_of(a.begin(), a.end(), [](int c) { return c == 0; });
}

FieldElement FieldSpec::add(const FieldElement& a, const FieldElement& b) const {
  check_element(a);
  check_element(b);
  FieldElement c(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) c[i] = mod(a[i] + b[i], p_);
  return c;
}

FieldElement FieldSpec::sub(const FieldElement& a, const FieldElement& b) const {
  check_element(a);
  check_element(b);
  FieldElement c(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) c[i] = mod(a[i] - b[i], p_);
  return c;
}

FieldElement FieldSpec::mul(const FieldElement& a, const FieldElement& b) const {
  check_element(a);
  check_element(b);
  Poly r = poly_mod(poly_mul(a, b, p_), modulus_, p_);
  r.resize(static_cast<std::size_t>(degree()), 0);
  return r;
}

FieldElement FieldSpec::inv(const FieldElement& a) const {
  if (is_zero(a)) throw ValidationError("zero has no multiplicative inverse");
  // a^(q - 2) in the multiplicative group of order q - 1.
  Poly r = poly_powmod(a, order_ - 2, modulus_, p_);
  r.resize(static_cast<std::size_t>(degree()), 0);
  return r;
}

SymbolVector FieldSpec::to_symbols(const FieldElement& a) const {
  check_element(a);
  SymbolVector s(static_cast<std::size_t>(ell_), 0);
  for (int i = 0; i < ell_; ++i) {
    int v = 0;
    for (int j = e_ - 1; j >= 0; --j) v = v * p_ + a[static_cast<std::size_t>(i * e_ + j)];
    s[static_cast<std::size_t>(i)] = v;
  }
  return s;
}

FieldElement FieldSpec::from_symbols(const SymbolVector& s) const {
  if (static_cast<int>(s.size()) != ell_) throw DimensionError("symbol vector has the wrong length");
  FieldElement a = zero();
  for (int i = 0; i < ell_; ++i) {
    int v = s[static_cast<std::size_t>(i)];
    if (v < 0 || v >= symbol_size_) throw ValidationError("symbol outside [0, m_v)");
    for (int j = 0; j < e_; ++j) {
      a[static_cast<std::size_t>(i * e_ + j)] = v % p_;
      v /= p_;
    }
  }
  return a;
}

std::uint64_t FieldSpec::index_of(const FieldElement& a) const {
  check_element(a);
  std::uint64_t idx = 0;
  for (int i = degree() - 1; i >= 0; --i) idx = idx * static_cast<std::uint64_t>(p_) + static_cast<std::uint64_t>(a[static_cast<std::size_t>(i)]);
  return idx;
}

FieldElement FieldSpec::element_at(std::uint64_t index) const {
  if (index >= order_) throw ValidationError("field element index out of range");
  FieldElement a = zero();
  for (int i = 0; i < degree(); ++i) {
    a[static_cast<std::size_t>(i)] = static_cast<int>(index % static_cast<std::uint64_t>(p_));
    index /= static_cast<std::uint64_t>(p_);
  }
  return a;
}

HashFunction make_hash(const FieldSpec& field, FieldElement u, int k) {
  if (field.is_zero(u)) throw ValidationError("hash index u must be nonzero");
  if (k < 1 || k > field.length()) throw ValidationError("hash output length k must lie in [1, ell]");
  return HashFunction{field, std::move(u), k};
}

SymbolVector hash_eval(const HashFunction& f, const SymbolVector& v) {
  const SymbolVector prod = f.field.to_symbols(f.field.mul(f.u, f.field.from_symbols(v)));
  return SymbolVector(prod.begin(), prod.begin() + f.k);
}

namespace {

// Enumerates V^n in lexicographic order (last symbol fastest).
std::vector<SymbolVector> all_vectors(int symbol_size, int n) {
  const std::uint64_t count = ipow(static_cast<std::uint64_t>(symbol_size), n);
  std::vector<SymbolVector> out;
  out.reserve(count);
  SymbolVector v(static_cast<std::size_t>(n), 0);
  for (std::uint64_t t = 0; t < count; ++t) {
    out.push_back(v);
    for (int i = n - 1; i >= 0; --i) {
      if (++v[static_cast<std::size_t>(i)] < symbol_size) break;
      v[static_cast<std::size_t>(i)] = 0;
    }
  }
  return out;
}

}  // namespace

HashCodebook preimage(const HashFunction& f, const SymbolVector& z) {
  if (static_cast<int>(z.size()) != f.k) throw DimensionError("hash value has the wrong length");
  for (int s : z)
    if (s < 0 || s >= f.field.symbol_size()) throw ValidationError("hash value symbol outside [0, m_v)");
  const FieldElement u_inv = f.field.inv(f.u);
  HashCodebook cb{f, z, {}};
  for (const SymbolVector& r : all_vectors(f.field.symbol_size(), f.field.length() - f.k)) {
    SymbolVector w = z;
    w.insert(w.end(), r.begin(), r.end());
    cb.codewords.push_back(f.field.to_symbols(f.field.mul(f.field.from_symbols(w), u_inv)));
  }
  std::sort(cb.codewords.begin(), cb.codewords.end());
  return cb;
}

std::vector<SymbolVector> full_codebook(const FieldSpec& field) {
  return all_vectors(field.symbol_size(), field.length());
}

std::vector<HashFunction> hash_family(const FieldSpec& field, int k) {
  std::vector<HashFunction> family;
  family.reserve(field.order() - 1);
  for (std::uint64_t i = 1; i < field.order(); ++i) family.push_back(make_hash(field, field.element_at(i), k));
  return family;
}

UniversalityReport verify_two_universal(const std::vector<SymbolMap>& family, int symbol_size, int ell,
                                        int output_symbols) {
  if (family.empty()) throw ValidationError("hash family is empty");
  if (symbol_size < 1 || ell < 1 || output_symbols < 0) throw ValidationError("invalid universality domain");
  const std::uint64_t domain = ipow(static_cast<std::uint64_t>(symbol_size), ell);
  if (domain > 4096) throw ValidationError("exhaustive universality check needs |V|^ell <= 4096");
  const std::uint64_t range = ipow(static_cast<std::uint64_t>(symbol_size), output_symbols);
  const std::vector<SymbolVector> xs = all_vectors(symbol_size, ell);
  const std::size_t nx = xs.size();

  std::vector<std::uint32_t> collisions(nx * nx, 0);
  UniversalityReport rep;
  rep.bound = 1.0 / static_cast<double>(range);
  rep.regular = domain % range == 0;
  const std::uint64_t expected = domain / range;
  for (const SymbolMap& f : family) {
    std::map<SymbolVector, std::vector<std::size_t>> buckets;
    for (std::size_t i = 0; i < nx; ++i) {
      SymbolVector y = f(xs[i]);
      if (static_cast<int>(y.size()) != output_symbols) throw DimensionError("hash output has the wrong length");
      for (int s : y)
        if (s < 0 || s >= symbol_size) throw ValidationError("hash output symbol out of range");
      buckets[std::move(y)].push_back(i);
    }
    if (buckets.size() != range) rep.regular = false;
    for (const auto& [value, members] : buckets) {
      if (members.size() != expected) rep.regular = false;
      for (std::size_t a = 0; a < members.size(); ++a)
        for (std::size_t b = a + 1; b < members.size(); ++b) ++collisions[members[a] * nx + members[b]];
    }
  }
  std::uint32_t worst = 0;
  for (std::size_t a = 0; a < nx; ++a)
    for (std::size_t b = a + 1; b < nx; ++b) worst = std::max(worst, collisions[a * nx + b]);
  rep.max_collision = nx > 1 ? static_cast<double>(worst) / static_cast<double>(family.size()) : 0.0;
  rep.universal = rep.max_collision <= rep.bound + 1e-15;
  return rep;
}

UniversalityReport verify_two_universal(const FieldSpec& field, int k) {
  std::vector<SymbolMap> maps;
  for (HashFunction& f : hash_family(field, k))
    maps.emplace_back([f = std::move(f)](const SymbolVector& v) { return hash_eval(f, v); });
  return verify_two_universal(maps, field.symbol_size(), field.length(), k);
}

CodebookSize codebook_size_for(const FieldSpec& field, std::uint64_t requested) {
  for (int k = field.length(); k >= 1; --k) {
    const std::uint64_t h = ipow(static_cast<std::uint64_t>(field.symbol_size()), field.length() - k);
    if (h >= requested) return {k, h};
  }
  throw ValidationError("requested codebook size exceeds m_v^(ell-1); use the full codebook");
}

namespace {

template <typename T>
void write_list(std::ostream& out, const std::string& key, const std::vector<T>& values) {
  out << key;
  for (const T& v : values) out << ' ' << v;
  out << '\n';
}

std::vector<int> parse_ints(std::istringstream& line) {
  std::vector<int> v;
  int x;
  while (line >> x) v.push_back(x);
  if (!line.eof()) throw ValidationError("codebook file: non-integer token");
  return v;
}

}  // namespace

void write_codebook(std::ostream& out, const HashCodebook& cb) {
  const FieldSpec& f = cb.f.field;
  out << "p " << f.characteristic() << '\n';
  out << "e " << f.extension() << '\n';
  out << "ell " << f.length() << '\n';
  out << "k " << cb.f.k << '\n';
  write_list(out, "modulus", f.modulus());
  write_list(out, "u", f.to_symbols(cb.f.u));
  write_list(out, "z", cb.z);
  out << "h " << cb.h() << '\n';
  for (const SymbolVector& w : cb.codewords) {
    for (std::size_t i = 0; i < w.size(); ++i) out << (i ? " " : "") << w[i];
    out << '\n';
  }
}

HashCodebook read_codebook(std::istream& in) {
  std::unordered_map<std::string, std::vector<int>> header;
  const char* keys[] = {"p", "e", "ell", "k", "modulus", "u", "z", "h"};
  std::string text;
  for (const char* key : keys) {
    if (!std::getline(in, text)) throw ValidationError("codebook file: truncated header");
    std::istringstream line(text);
    std::string got;
    line >> got;
    if (got != key) throw ValidationError("codebook file: expected header key '" + std::string(key) + "'");
    header[key] = parse_ints(line);
  }
  auto scalar = [&](const char* key) {
    const auto& v = header[key];
    if (v.size() != 1) throw ValidationError(std::string("codebook file: '") + key + "' needs one value");
    return v.front();
  };
  FieldSpec field(scalar("p"), scalar("e"), scalar("ell"), header["modulus"]);
  HashFunction f = make_hash(field, field.from_symbols(header["u"]), scalar("k"));
  HashCodebook cb{f, header["z"], {}};
  const int h = scalar("h");
  while (std::getline(in, text)) {
    if (text.empty()) continue;
    std::istringstream line(text);
    SymbolVector w = parse_ints(line);
    if (static_cast<int>(w.size()) != field.length()) throw ValidationError("codebook file: codeword length");
    cb.codewords.push_back(std::move(w));
  }
  if (static_cast<int>(cb.codewords.size()) != h) throw ValidationError("codebook file: codeword count differs from h");
  const HashCodebook expected = preimage(f, cb.z);
  if (expected.codewords != cb.codewords) throw ValidationError("codebook file: codewords are not f^-1(z)");
  return cb;
}

}  // namespace covq
