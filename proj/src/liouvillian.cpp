#include "edgesync/liouvillian.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>

#include <Eigen/Sparse>

#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <lapacke.h>

#include "edgesync/errors.hpp"

namespace edgesync {

namespace {

using cd = std::complex<double>;
using SparseMatrix = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

const double kInvSqrt2 = 1.0 / std::sqrt(2.0);

// Orthonormal basis of Hermitian N x N matrices: E_ii, then for every pair
// i < j the symmetric (E_ij + E_ji)/sqrt2 and antisymmetric i(E_ij - E_ji)/sqrt2
// elements. The Liouvillian is real in this basis.
class HermitianBasis {
 public:
  explicit HermitianBasis(int n) : n_(n), pair_(static_cast<std::size_t>(n) * n, -1) {
    int p = 0;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) {
        pair_[i * n + j] = p++;
        pairs_.emplace_back(i, j);
      }
  }

  int n() const { return n_; }
  int dim() const { return n_ * n_; }
  int diag(int i) const { return i; }
  int sym(int i, int j) const { return n_ + 2 * pair_[i * n_ + j]; }
  int anti(int i, int j) const { return sym(i, j) + 1; }
  std::pair<int, int> pair_of(int index) const { return pairs_[(index - n_) / 2]; }

  struct Entry {
    int r;
    int c;
    cd v;
  };

  std::vector<Entry> entries(int b) const {
    if (b < n_) return {{b, b, 1.0}};
    const auto [i, j] = pair_of(b);
    if ((b - n_) % 2 == 0) return {{i, j, kInvSqrt2}, {j, i, kInvSqrt2}};
    return {{i, j, cd(0.0, kInvSqrt2)}, {j, i, cd(0.0, -kInvSqrt2)}};
  }

  // Adds the coordinates of v E_rc to `coords`.
  template <class Add>
  void project(int r, int c, cd v, Add&& add) const {
    if (r == c) {
      add(diag(r), v);
    } else if (r < c) {
      add(sym(r, c), v * kInvSqrt2);
      add(anti(r, c), v * cd(0.0, -kInvSqrt2));
    } else {
      add(sym(c, r), v * kInvSqrt2);
      add(anti(c, r), v * cd(0.0, kInvSqrt2));
    }
  }

  Eigen::MatrixXcd to_matrix(const Eigen::VectorXcd& y) const {
    Eigen::MatrixXcd m(n_, n_);
    for (int i = 0; i < n_; ++i) m(i, i) = y(i);
    for (const auto& [i, j] : pairs_) {
      const cd s = y(sym(i, j)), a = y(anti(i, j));
      m(i, j) = (s + cd(0.0, 1.0) * a) * kInvSqrt2;
      m(j, i) = (s - cd(0.0, 1.0) * a) * kInvSqrt2;
    }
    return m;
  }

  Eigen::VectorXd coordinates(const Eigen::MatrixXcd& x) const {
    Eigen::VectorXd y(dim());
    for (int i = 0; i < n_; ++i) y(i) = x(i, i).real();
    for (const auto& [i, j] : pairs_) {
      const cd h = 0.5 * (x(i, j) + std::conj(x(j, i)));
      y(sym(i, j)) = std::sqrt(2.0) * h.real();
      y(anti(i, j)) = std::sqrt(2.0) * h.imag();
    }
    return y;
  }

  cd entry(const Eigen::VectorXcd& y, int i, int j) const {
    if (i == j) return y(i);
    if (i < j) return (y(sym(i, j)) + cd(0.0, 1.0) * y(anti(i, j))) * kInvSqrt2;
    return (y(sym(j, i)) - cd(0.0, 1.0) * y(anti(j, i))) * kInvSqrt2;
  }

 private:
  int n_;
  std::vector<int> pair_;
  std::vector<std::pair<int, int>> pairs_;
};

SparseMatrix real_generator(const Superoperator& m, const HermitianBasis& basis) {
  const auto& rows = m.hamiltonian().rows();
  const auto& damp = m.damping();
  std::vector<Triplet> triplets;
  std::vector<cd> scratch(basis.dim(), 0.0);
  std::vector<int> touched;
  auto add = [&](int k, cd v) {
    if (scratch[k] == cd(0.0)) touched.push_back(k);
    scratch[k] += v;
  };
  const cd i_unit(0.0, 1.0);
  for (int b = 0; b < basis.dim(); ++b) {
    // M(E_rc) = i sum_k h_kr E_kc - i sum_l h_cl E_rl - D_rc E_rc
    for (const auto& e : basis.entries(b)) {
      for (const auto& [k, h] : rows[e.r]) basis.project(k, e.c, i_unit * h * e.v, add);
      for (const auto& [l, h] : rows[e.c]) basis.project(e.r, l, -i_unit * h * e.v, add);
      if (damp(e.r, e.c) != 0.0) basis.project(e.r, e.c, -damp(e.r, e.c) * e.v, add);
    }
    std::sort(touched.begin(), touched.end());
    touched.erase(std::unique(touched.begin(), touched.end()), touched.end());
    for (int k : touched) {
      if (scratch[k].real() != 0.0) triplets.emplace_back(k, b, scratch[k].real());
      scratch[k] = 0.0;
    }
    touched.clear();
  }
  SparseMatrix k(basis.dim(), basis.dim());
  k.setFromTriplets(triplets.begin(), triplets.end());
  return k;
}

// Linear maps X -> T(X) on Hermitian matrices that commute with M and act on
// the basis as signed permutations.
struct SignedPermutation {
  std::vector<int> image;
  std::vector<double> sign;
};

struct Symmetry {
  std::string name = "none";
  std::vector<SignedPermutation> generators;
};

// X -> O X O^T with O_{a,i} = sigma_i delta_{a, N-1-i}.
SignedPermutation reflection_action(const HermitianBasis& basis, const std::vector<double>& sigma) {
  const int n = basis.n();
  SignedPermutation t{std::vector<int>(basis.dim()), std::vector<double>(basis.dim())};
  for (int b = 0; b < basis.dim(); ++b) {
    if (b < n) {
      t.image[b] = n - 1 - b;
      t.sign[b] = 1.0;
      continue;
    }
    const auto [i, j] = basis.pair_of(b);
    const double s = sigma[i] * sigma[j];
    const int ri = n - 1 - j, rj = n - 1 - i;
    const bool symmetric = (b - n) % 2 == 0;
    t.image[b] = symmetric ? basis.sym(ri, rj) : basis.anti(ri, rj);
    t.sign[b] = symmetric ? s : -s;
  }
  return t;
}

// X -> G X^T G with G = diag((-1)^i).
SignedPermutation chiral_action(const HermitianBasis& basis) {
  const int n = basis.n();
  SignedPermutation t{std::vector<int>(basis.dim()), std::vector<double>(basis.dim(), 1.0)};
  for (int b = 0; b < basis.dim(); ++b) {
    t.image[b] = b;
    if (b < n) continue;
    const auto [i, j] = basis.pair_of(b);
    const double parity = (i + j) % 2 == 0 ? 1.0 : -1.0;
    t.sign[b] = (b - n) % 2 == 0 ? parity : -parity;
  }
  return t;
}

Symmetry find_symmetry(const Superoperator& m, const HermitianBasis& basis) {
  const int n = m.n_sites();
  const auto& h = m.hamiltonian().matrix();
  const double tol = 1e-12 * std::max(1.0, h.cwiseAbs().maxCoeff());
  Symmetry sym;
  std::vector<std::string> names;

  const auto& sites = m.dissipation().sites;
  bool mirrored = true;
  for (int s : sites)
    if (!std::binary_search(sites.begin(), sites.end(), n + 1 - s)) mirrored = false;
  for (int signed_pattern = 0; mirrored && signed_pattern < 2; ++signed_pattern) {
    std::vector<double> sigma(n, 1.0);
    if (signed_pattern)
      for (int i = 1; i < n; i += 2) sigma[i] = -1.0;
    bool ok = true;
    for (int a = 0; a < n && ok; ++a)
      for (int b = 0; b < n && ok; ++b) {
        const int ra = n - 1 - a, rb = n - 1 - b;
        if (std::abs(sigma[ra] * sigma[rb] * h(ra, rb) - h(a, b)) > tol) ok = false;
      }
    if (ok) {
      sym.generators.push_back(reflection_action(basis, sigma));
      names.push_back(signed_pattern ? "signed_reflection" : "reflection");
      break;
    }
  }

  bool chiral = true;
  for (int a = 0; a < n && chiral; ++a)
    for (int b = a % 2; b < n && chiral; b += 2)
      if (std::abs(h(a, b)) > tol) chiral = false;
  if (chiral) {
    sym.generators.push_back(chiral_action(basis));
    names.push_back("chiral");
  }

  if (!names.empty()) {
    sym.name = names[0];
    for (std::size_t k = 1; k < names.size(); ++k) sym.name += "+" + names[k];
  }
  return sym;
}

// Orthonormal bases of the joint eigenspaces of commuting involutions.
std::vector<SparseMatrix> sector_bases(const HermitianBasis& basis, const Symmetry& sym) {
  const int dim = basis.dim();
  const int g = static_cast<int>(sym.generators.size());
  const int elements = 1 << g;
  std::vector<std::vector<Triplet>> columns(elements);
  std::vector<int> counts(elements, 0);
  std::vector<char> visited(dim, 0);
  std::vector<int> index(elements);
  std::vector<double> sign(elements);
  for (int b = 0; b < dim; ++b) {
    if (visited[b]) continue;
    // Group element `mask` applies the generators whose bits are set.
    for (int mask = 0; mask < elements; ++mask) {
      int k = b;
      double s = 1.0;
      for (int q = 0; q < g; ++q) {
        if (!(mask >> q & 1)) continue;
        s *= sym.generators[q].sign[k];
        k = sym.generators[q].image[k];
      }
      index[mask] = k;
      sign[mask] = s;
      visited[k] = 1;
    }
    for (int chi = 0; chi < elements; ++chi) {
      std::vector<std::pair<int, double>> v;
      for (int mask = 0; mask < elements; ++mask) {
        const double c = (std::popcount(static_cast<unsigned>(chi & mask)) % 2 ? -1.0 : 1.0) * sign[mask];
        auto it = std::find_if(v.begin(), v.end(), [&](const auto& e) { return e.first == index[mask]; });
        if (it == v.end())
          v.emplace_back(index[mask], c);
        else
          it->second += c;
      }
      double norm = 0.0;
      for (const auto& e : v) norm += e.second * e.second;
      if (norm < 0.5) continue;
      norm = std::sqrt(norm);
      for (const auto& e : v)
        if (e.second != 0.0) columns[chi].emplace_back(e.first, counts[chi], e.second / norm);
      ++counts[chi];
    }
  }
  std::vector<SparseMatrix> out;
  for (int chi = 0; chi < elements; ++chi) {
    if (counts[chi] == 0) continue;
    SparseMatrix q(dim, counts[chi]);
    q.setFromTriplets(columns[chi].begin(), columns[chi].end());
    out.push_back(std::move(q));
  }
  return out;
}

struct RealEigen {
  Eigen::VectorXcd values;
  Eigen::MatrixXcd right;
  Eigen::MatrixXcd left;
};

Eigen::MatrixXcd unpack_vectors(const Eigen::MatrixXd& v, const std::vector<double>& wi) {
  const int n = static_cast<int>(v.rows());
  Eigen::MatrixXcd out(n, n);
  for (int j = 0; j < n; ++j) {
    if (wi[j] > 0.0 && j + 1 < n) {
      for (int r = 0; r < n; ++r) {
        out(r, j) = cd(v(r, j), v(r, j + 1));
        out(r, j + 1) = cd(v(r, j), -v(r, j + 1));
      }
      ++j;
    } else {
      out.col(j) = v.col(j).cast<cd>();
    }
  }
  return out;
}

RealEigen real_eigen(Eigen::MatrixXd a, bool right, bool left) {
  const lapack_int n = static_cast<lapack_int>(a.rows());
  std::vector<double> wr(n), wi(n);
  Eigen::MatrixXd vl(left ? n : 1, left ? n : 1), vr(right ? n : 1, right ? n : 1);
  const lapack_int info =
      LAPACKE_dgeev(LAPACK_COL_MAJOR, left ? 'V' : 'N', right ? 'V' : 'N', n, a.data(), n, wr.data(),
                    wi.data(), vl.data(), left ? n : 1, vr.data(), right ? n : 1);
  if (info != 0) throw NumericalError("dgeev failed with info = " + std::to_string(info));
  RealEigen out;
  out.values.resize(n);
  for (lapack_int j = 0; j < n; ++j) out.values(j) = cd(wr[j], wi[j]);
  if (right) out.right = unpack_vectors(vr, wi);
  if (left) out.left = unpack_vectors(vl, wi);
  return out;
}

void check_size(const Superoperator& m, bool allow_large) {
  if (!allow_large && m.dimension() > kDefaultSuperoperatorCap)
    throw CapabilityError("Liouvillian dimension N^2 = " + std::to_string(m.dimension()) +
                          " exceeds " + std::to_string(kDefaultSuperoperatorCap) +
                          "; pass --large to diagonalize anyway");
}

}  // namespace

Superoperator::Superoperator(HamiltonianMatrix h, DissipationSpec d)
    : h_(std::move(h)), d_(std::move(d)) {
  validate(d_, h_.size());
  damping_ = damping_matrix(d_, h_.size());
}

Eigen::MatrixXcd Superoperator::apply(const Eigen::MatrixXcd& c) const {
  return lindblad_rhs(c, h_, d_);
}

Eigen::MatrixXcd Superoperator::dense() const {
  const int n = n_sites();
  const auto& h = h_.matrix();
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd coherent(n * n, n * n);
  // vec(hC) = (I (x) h) vec(C), vec(Ch) = (h^T (x) I) vec(C)
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      coherent.block(a * n, b * n, n, n) = id(a, b) * h - h(b, a) * id;
  Eigen::MatrixXcd out = cd(0.0, 1.0) * coherent.cast<cd>();
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) out(i + j * n, i + j * n) -= damping_(i, j);
  return out;
}

Superoperator build_superoperator(const HamiltonianMatrix& h, const DissipationSpec& d) {
  return Superoperator(h, d);
}

Eigen::VectorXcd vectorize(const Eigen::MatrixXcd& c) {
  return Eigen::Map<const Eigen::VectorXcd>(c.data(), c.size());
}

Eigen::MatrixXcd unvectorize(const Eigen::VectorXcd& v, int n) {
  if (v.size() != static_cast<Eigen::Index>(n) * n) throw DimensionError("unvectorize: size mismatch");
  return Eigen::Map<const Eigen::MatrixXcd>(v.data(), n, n);
}

std::string to_string(ModeClass c) {
  switch (c) {
    case ModeClass::Stationary: return "stationary";
    case ModeClass::Sync: return "sync";
    case ModeClass::Relaxing: return "relaxing";
  }
  return "unknown";
}

Eigen::VectorXcd superoperator_eigenvalues(const Superoperator& m, bool use_symmetry, bool allow_large) {
  check_size(m, allow_large);
  const HermitianBasis basis(m.n_sites());
  const SparseMatrix k = real_generator(m, basis);
  const auto sectors = sector_bases(basis, use_symmetry ? find_symmetry(m, basis) : Symmetry{});
  Eigen::VectorXcd out(basis.dim());
  Eigen::Index offset = 0;
  for (const auto& q : sectors) {
    const SparseMatrix ks = q.transpose() * k * q;
    const auto e = real_eigen(Eigen::MatrixXd(ks), false, false);
    out.segment(offset, e.values.size()) = e.values;
    offset += e.values.size();
  }
  return out;
}

LiouvillianReport spectrum_and_classify(const Superoperator& m, const EigenSystem& es,
                                        const std::vector<int>& protected_indices,
                                        double omega_sync_hint, const SpectrumOptions& options) {
  check_size(m, options.allow_large);
  const int n = m.n_sites();
  if (es.states.rows() != n) throw DimensionError("spectrum_and_classify: eigensystem size mismatch");
  if (!(omega_sync_hint > 0.0)) throw ConfigError("spectrum_and_classify: omega hint must be positive");
  for (int p : protected_indices)
    if (p < 0 || p >= n) throw DimensionError("spectrum_and_classify: protected index out of range");
  const bool project = options.initial != nullptr;
  if (project && (options.initial->rows() != n || options.initial->cols() != n))
    throw DimensionError("spectrum_and_classify: initial state size mismatch");
  for (const auto& [i, j] : options.probes)
    if (i < 0 || j < 0 || i >= n || j >= n) throw DimensionError("spectrum_and_classify: probe out of range");

  const HermitianBasis basis(n);
  const SparseMatrix k = real_generator(m, basis);
  const Symmetry sym = options.use_symmetry ? find_symmetry(m, basis) : Symmetry{};
  const auto sectors = sector_bases(basis, sym);

  Eigen::MatrixXd up(n, protected_indices.size());
  for (std::size_t c = 0; c < protected_indices.size(); ++c) up.col(c) = es.states.col(protected_indices[c]);
  const Eigen::MatrixXcd upc = up.cast<cd>();

  LiouvillianReport report;
  report.omega_sync_hint = omega_sync_hint;
  report.protected_indices = protected_indices;
  report.symmetry = sym.name;
  const double zero_tol = 1e-8 * m.hamiltonian().norm2();

  std::vector<cd> pos(options.probes.size(), 0.0), neg(options.probes.size(), 0.0);
  Eigen::VectorXd c0;
  if (project) c0 = basis.coordinates(*options.initial);

  for (std::size_t s = 0; s < sectors.size(); ++s) {
    const auto& q = sectors[s];
    const SparseMatrix ks = q.transpose() * k * q;
    const auto e = real_eigen(Eigen::MatrixXd(ks), true, project);
    Eigen::VectorXd cs;
    if (project) cs = q.transpose() * c0;
    for (Eigen::Index j = 0; j < e.values.size(); ++j) {
      const cd lambda = e.values(j);
      const Eigen::VectorXcd y = q * e.right.col(j);
      const Eigen::MatrixXcd r = basis.to_matrix(y / y.norm());
      const double overlap = up.cols() ? (upc.transpose() * r * upc).squaredNorm() : 0.0;
      const double im = std::abs(lambda.imag());
      ModeClass cls = ModeClass::Relaxing;
      if (overlap > 0.5 && std::abs(im - omega_sync_hint) < 0.1 * omega_sync_hint)
        cls = ModeClass::Sync;
      else if ((overlap > 0.5 && im < 0.1 * omega_sync_hint) || std::abs(lambda) < zero_tol)
        cls = ModeClass::Stationary;
      report.modes.push_back({lambda, cls, overlap, static_cast<int>(s)});

      if (project && cls == ModeClass::Sync) {
        const cd denom = e.left.col(j).dot(e.right.col(j));
        const cd alpha = e.left.col(j).dot(cs.cast<cd>()) / denom;
        for (std::size_t p = 0; p < options.probes.size(); ++p) {
          const cd term = alpha * basis.entry(y, options.probes[p].first, options.probes[p].second);
          (lambda.imag() > 0.0 ? pos[p] : neg[p]) += term;
        }
      }
    }
  }

  double best_sync = std::numeric_limits<double>::infinity();
  double best_relax = std::numeric_limits<double>::infinity();
  report.max_real_part = -std::numeric_limits<double>::infinity();
  for (const auto& mode : report.modes) {
    report.max_real_part = std::max(report.max_real_part, mode.eigenvalue.real());
    const double rate = std::abs(mode.eigenvalue.real());
    switch (mode.mode_class) {
      case ModeClass::Stationary: ++report.n_stationary; break;
      case ModeClass::Sync:
        ++report.n_sync;
        if (rate < best_sync) {
          best_sync = rate;
          report.omega_sync = std::abs(mode.eigenvalue.imag());
        }
        break;
      case ModeClass::Relaxing:
        ++report.n_relaxing;
        best_relax = std::min(best_relax, rate);
        break;
    }
  }
  if (report.n_sync == 0)
    throw ClassificationError("no Liouvillian mode matches the synchronization frequency " +
                              std::to_string(omega_sync_hint));
  report.r_decay = best_sync;
  report.r_relax = report.n_relaxing ? best_relax : std::numeric_limits<double>::quiet_NaN();
  for (std::size_t p = 0; p < options.probes.size(); ++p)
    report.projections.push_back({options.probes[p].first, options.probes[p].second, pos[p], neg[p]});
  std::sort(report.modes.begin(), report.modes.end(), [](const auto& a, const auto& b) {
    return a.eigenvalue.real() > b.eigenvalue.real() ||
           (a.eigenvalue.real() == b.eigenvalue.real() && a.eigenvalue.imag() > b.eigenvalue.imag());
  });
  return report;
}

nlohmann::json to_json(const LiouvillianReport& r, bool include_modes) {
  auto number = [](double v) -> nlohmann::json {
    if (std::isfinite(v)) return v;
    return nullptr;
  };
  nlohmann::json j;
  j["r_decay"] = number(r.r_decay);
  j["r_relax"] = number(r.r_relax);
  j["omega_sync"] = number(r.omega_sync);
  j["omega_sync_hint"] = r.omega_sync_hint;
  j["counts"] = {{"stationary", r.n_stationary}, {"sync", r.n_sync}, {"relaxing", r.n_relaxing}};
  j["max_real_part"] = number(r.max_real_part);
  j["symmetry"] = r.symmetry;
  j["protected_indices"] = r.protected_indices;
  nlohmann::json proj = nlohmann::json::array();
  for (const auto& p : r.projections)
    proj.push_back({{"i", p.i + 1},
                    {"j", p.j + 1},
                    {"positive", {p.positive.real(), p.positive.imag()}},
                    {"negative", {p.negative.real(), p.negative.imag()}},
                    {"amplitude", p.amplitude()}});
  j["sync_projections"] = proj;
  if (include_modes) {
    nlohmann::json modes = nlohmann::json::array();
    for (const auto& m : r.modes)
      modes.push_back({{"re", m.eigenvalue.real()},
                       {"im", m.eigenvalue.imag()},
                       {"class", to_string(m.mode_class)},
                       {"overlap", m.overlap},
                       {"sector", m.sector}});
    j["modes"] = modes;
  }
  return j;
}

}  // namespace edgesync
