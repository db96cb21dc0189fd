#include "qswitch/abstraction.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <utility>

#include "qswitch/error.hpp"
#include "qswitch/parallel.hpp"
#include "qswitch/simd/kernels.hpp"

namespace qswitch {

namespace {

std::string describe(const Cell& q) {
  std::ostringstream os;
  os << '(';
  for (int i = 0; i < q.dim(); ++i) os << (i ? "," : "") << q.k[i];
  os << ')';
  return os.str();
}

[[noreturn]] void overflow_at(const Cell& q, std::size_t p) {
  throw Error(ErrorKind::IntegrationOverflow,
              "non-finite successor for cell " + describe(q) + " under mode " +
                  std::to_string(p));
}

simd::AffineRowArgs row_args_template(const AffineFlow& f, const Lattice& lat,
                                      const CellRange& domain) {
  simd::AffineRowArgs a;
  const int n = lat.dim();
  a.n = n;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) a.transition[i * n + j] = f.transition(i, j);
    a.offset[i] = f.offset[i];
    a.kmin[i] = static_cast<double>(domain.kmin()[i]);
    a.kmax[i] = static_cast<double>(domain.kmax()[i]);
    a.stride[i] = static_cast<double>(domain.stride(i));
  }
  a.spacing = lat.spacing();
  a.first = domain.kmin()[n - 1];
  a.length = domain.row_length();
  return a;
}

}  // namespace

SymbolicModel::SymbolicModel(Lattice lat, CellRange domain, std::size_t modes,
                             double tau, std::vector<std::int32_t> succ)
    : lat_(std::move(lat)),
      domain_(std::move(domain)),
      modes_(modes),
      tau_(tau),
      succ_(std::move(succ)) {
  if (succ_.size() != modes_ * domain_.count()) {
    throw Error(ErrorKind::InvalidArgument, "successor table has wrong size");
  }
}

std::optional<Cell> SymbolicModel::successor(const Cell& q, std::size_t p) const {
  if (p >= modes_) throw Error(ErrorKind::Domain, "mode out of range");
  const std::int32_t s = successor_index(domain_.index(q), p);
  if (s == kOut) return std::nullopt;
  return domain_.cell_at(static_cast<std::size_t>(s));
}

double SymbolicModel::out_fraction(std::size_t p) const {
  std::size_t out = 0;
  for (std::int32_t s : successors(p)) out += (s == kOut);
  return domain_.count() == 0 ? 0.0
                              : static_cast<double>(out) / domain_.count();
}

SymbolicModel build_abstraction(const SwitchedSystem& sys, const Lattice& lat,
                                const CellRange& domain, double tau,
                                const AbstractionOptions& opts) {
  const int n = lat.dim();
  if (sys.dim() != n || domain.dim() != n) {
    throw Error(ErrorKind::InvalidArgument, "abstraction dimension mismatch");
  }
  if (n > simd::kMaxDim) {
    throw Error(ErrorKind::InvalidArgument, "dimension above supported maximum");
  }
  if (domain.empty()) throw Error(ErrorKind::EmptySpec, "working box has no cells");
  if (domain.count() >= static_cast<std::size_t>(std::numeric_limits<std::int32_t>::max())) {
    throw Error(ErrorKind::InvalidArgument, "working box has too many cells");
  }
  if (!(tau > 0.0)) throw Error(ErrorKind::InvalidArgument, "tau must be positive");

  const std::size_t cells = domain.count();
  const std::size_t modes = sys.mode_count();
  const std::size_t row_len = domain.row_length();
  const std::size_t rows = domain.row_count();
  std::vector<std::int32_t> succ(cells * modes);

  for (std::size_t p = 0; p < modes; ++p) {
    const ModeDynamics& mode = sys.mode(p);
    std::int32_t* out = succ.data() + p * cells;

    if (mode.is_affine()) {
      const simd::AffineRowArgs tmpl =
          row_args_template(affine_flow(mode, tau), lat, domain);
      const auto& kernels = simd::active_kernels();
      parallel_for(0, rows, opts.threads, [&](std::size_t lo, std::size_t hi) {
        simd::AffineRowArgs args = tmpl;
        for (std::size_t r = lo; r < hi; ++r) {
          const Cell head = domain.cell_at(r * row_len);
          for (int i = 0; i + 1 < n; ++i) args.lead[i] = head.k[i];
          std::int32_t* row_out = out + r * row_len;
          kernels.affine_quantize_row(args, row_out);
          for (std::size_t e = 0; e < row_len; ++e) {
            if (row_out[e] == simd::kNonFiniteIndex) {
              overflow_at(domain.cell_at(r * row_len + e), p);
            }
          }
        }
      });
    } else {
      parallel_for(0, cells, opts.threads, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t c = lo; c < hi; ++c) {
          const Cell q = domain.cell_at(c);
          Vec x;
          try {
            x = flow_rk4(mode, lat.center(q), tau, opts.flow.substeps);
          } catch (const Error& e) {
            if (e.kind() == ErrorKind::IntegrationOverflow) overflow_at(q, p);
            throw;
          }
          const Cell t = lat.quantize(x);
          out[c] = domain.contains(t)
                       ? static_cast<std::int32_t>(domain.index(t))
                       : SymbolicModel::kOut;
        }
      });
    }
  }
  return SymbolicModel(lat, domain, modes, tau, std::move(succ));
}

SymbolicModel build_abstraction(const SwitchedSystem& sys, const Lattice& lat,
                                const Box& working_box, double tau,
                                const AbstractionOptions& opts) {
  return build_abstraction(sys, lat, lat.cell_range(working_box), tau, opts);
}

}  // namespace qswitch
