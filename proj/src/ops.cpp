#include "autost/ops.hpp"

#include <algorithm>
#include <cmath>

#include "autost/errors.hpp"

namespace autost {
namespace {

template <typename F>
Tensor map(const Tensor& a, F f) {
  Tensor out(a.rows(), a.cols());
  auto src = a.data();
  auto dst = out.data();
  for (std::size_t k = 0; k < src.size(); ++k) dst[k] = f(src[k]);
  return out;
}

double stable_sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

Var add(Var a, Var b) {
  require_same_shape(a.value(), b.value(), "add");
  Tensor out = a.value();
  auto o = out.data();
  auto bv = b.value().data();
  for (std::size_t k = 0; k < o.size(); ++k) o[k] += bv[k];
  const std::size_t ia = a.id(), ib = b.id();
  return a.tape().record(std::move(out), {a, b}, [ia, ib](Tape& t, std::size_t self) {
    t.accumulate(ia, t.upstream(self));
    t.accumulate(ib, t.upstream(self));
  });
}

Var sub(Var a, Var b) {
  require_same_shape(a.value(), b.value(), "sub");
  Tensor out = a.value();
  auto o = out.data();
  auto bv = b.value().data();
  for (std::size_t k = 0; k < o.size(); ++k) o[k] -= bv[k];
  const std::size_t ia = a.id(), ib = b.id();
  return a.tape().record(std::move(out), {a, b}, [ia, ib](Tape& t, std::size_t self) {
    t.accumulate(ia, t.upstream(self));
    if (t.requires_grad(ib)) t.accumulate(ib, map(t.upstream(self), [](double g) { return -g; }));
  });
}

Var mul(Var a, Var b) {
  require_same_shape(a.value(), b.value(), "mul");
  Tensor out = a.value();
  auto o = out.data();
  auto bv = b.value().data();
  for (std::size_t k = 0; k < o.size(); ++k) o[k] *= bv[k];
  const std::size_t ia = a.id(), ib = b.id();
  return a.tape().record(std::move(out), {a, b}, [ia, ib](Tape& t, std::size_t self) {
    const Tensor& g = t.upstream(self);
    if (t.requires_grad(ia)) {
      Tensor ga = g;
      auto d = ga.data();
      auto other = t.value(ib).data();
      for (std::size_t k = 0; k < d.size(); ++k) d[k] *= other[k];
      t.accumulate(ia, ga);
    }
    if (t.requires_grad(ib)) {
      Tensor gb = g;
      auto d = gb.data();
      auto other = t.value(ia).data();
      for (std::size_t k = 0; k < d.size(); ++k) d[k] *= other[k];
      t.accumulate(ib, gb);
    }
  });
}

Var add_row(Var x, Var bias) {
  const Tensor& xv = x.value();
  const Tensor& bv = bias.value();
  if (bv.rows() != 1 || bv.cols() != xv.cols()) {
    throw ShapeError("add_row: shape mismatch " + shape_string(xv) + " vs " + shape_string(bv));
  }
  Tensor out = xv;
  for (std::size_t r = 0; r < out.rows(); ++r) {
    auto row = out.row(r);
    for (std::size_t c = 0; c < row.size(); ++c) row[c] += bv(0, c);
  }
  const std::size_t ix = x.id(), ib = bias.id();
  return x.tape().record(std::move(out), {x, bias}, [ix, ib](Tape& t, std::size_t self) {
    const Tensor& g = t.upstream(self);
    t.accumulate(ix, g);
    if (t.requires_grad(ib)) {
      Tensor gb(1, g.cols());
      for (std::size_t r = 0; r < g.rows(); ++r) {
        for (std::size_t c = 0; c < g.cols(); ++c) gb(0, c) += g(r, c);
      }
      t.accumulate(ib, gb);
    }
  });
}

Var scale(Var a, double factor) {
  const std::size_t ia = a.id();
  return a.tape().record(map(a.value(), [factor](double v) { return v * factor; }), {a},
                         [ia, factor](Tape& t, std::size_t self) {
                           t.accumulate(ia, map(t.upstream(self),
                                                [factor](double g) { return g * factor; }));
                         });
}

Var matmul(Var a, Var b) {
  const std::size_t ia = a.id(), ib = b.id();
  return a.tape().record(autost::matmul(a.value(), b.value()), {a, b},
                         [ia, ib](Tape& t, std::size_t self) {
                           const Tensor& g = t.upstream(self);
                           if (t.requires_grad(ia)) t.accumulate(ia, matmul_nt(g, t.value(ib)));
                           if (t.requires_grad(ib)) t.accumulate(ib, matmul_tn(t.value(ia), g));
                         });
}

Var matmul_nt(Var a, Var b) {
  const std::size_t ia = a.id(), ib = b.id();
  return a.tape().record(autost::matmul_nt(a.value(), b.value()), {a, b},
                         [ia, ib](Tape& t, std::size_t self) {
                           const Tensor& g = t.upstream(self);
                           if (t.requires_grad(ia)) t.accumulate(ia, autost::matmul(g, t.value(ib)));
                           if (t.requires_grad(ib)) t.accumulate(ib, matmul_tn(g, t.value(ia)));
                         });
}

Var transpose(Var a) {
  const std::size_t ia = a.id();
  return a.tape().record(autost::transpose(a.value()), {a}, [ia](Tape& t, std::size_t self) {
    t.accumulate(ia, autost::transpose(t.upstream(self)));
  });
}

Var spmm(std::shared_ptr<const SparseMatrix> a, Var x) {
  Tensor out = autost::spmm(*a, x.value());
  const std::size_t ix = x.id();
  return x.tape().record(std::move(out), {x}, [a = std::move(a), ix](Tape& t, std::size_t self) {
    t.accumulate(ix, spmm_t(*a, t.upstream(self)));
  });
}

Var relu(Var a) {
  const std::size_t ia = a.id();
  return a.tape().record(map(a.value(), [](double v) { return v > 0.0 ? v : 0.0; }), {a},
                         [ia](Tape& t, std::size_t self) {
                           Tensor g = t.upstream(self);
                           auto d = g.data();
                           auto x = t.value(ia).data();
                           for (std::size_t k = 0; k < d.size(); ++k) {
                             if (!(x[k] > 0.0)) d[k] = 0.0;
                           }
                           t.accumulate(ia, g);
                         });
}

Var sigmoid(Var a) {
  const std::size_t ia = a.id();
  return a.tape().record(map(a.value(), stable_sigmoid), {a}, [ia](Tape& t, std::size_t self) {
    Tensor g = t.upstream(self);
    auto d = g.data();
    auto y = t.value(self).data();
    for (std::size_t k = 0; k < d.size(); ++k) d[k] *= y[k] * (1.0 - y[k]);
    t.accumulate(ia, g);
  });
}

Var softplus(Var a) {
  const std::size_t ia = a.id();
  auto f = [](double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); };
  return a.tape().record(map(a.value(), f), {a}, [ia](Tape& t, std::size_t self) {
    Tensor g = t.upstream(self);
    auto d = g.data();
    auto x = t.value(ia).data();
    for (std::size_t k = 0; k < d.size(); ++k) d[k] *= stable_sigmoid(x[k]);
    t.accumulate(ia, g);
  });
}

Var log(Var a) {
  for (double v : a.value().data()) {
    if (!(v > 0.0)) throw ContractError("log: non-positive input " + std::to_string(v));
  }
  const std::size_t ia = a.id();
  return a.tape().record(map(a.value(), [](double v) { return std::log(v); }), {a},
                         [ia](Tape& t, std::size_t self) {
                           Tensor g = t.upstream(self);
                           auto d = g.data();
                           auto x = t.value(ia).data();
                           for (std::size_t k = 0; k < d.size(); ++k) d[k] /= x[k];
                           t.accumulate(ia, g);
                         });
}

Var exp(Var a) {
  const std::size_t ia = a.id();
  return a.tape().record(map(a.value(), [](double v) { return std::exp(v); }), {a},
                         [ia](Tape& t, std::size_t self) {
                           Tensor g = t.upstream(self);
                           auto d = g.data();
                           auto y = t.value(self).data();
                           for (std::size_t k = 0; k < d.size(); ++k) d[k] *= y[k];
                           t.accumulate(ia, g);
                         });
}

Var softmax_rows(Var a) {
  const Tensor& x = a.value();
  Tensor out(x.rows(), x.cols());
  for (std::size_t r = 0; r < x.rows(); ++r) {
    auto in = x.row(r);
    auto o = out.row(r);
    const double mx = in.empty() ? 0.0 : *std::max_element(in.begin(), in.end());
    double z = 0.0;
    for (std::size_t c = 0; c < in.size(); ++c) z += (o[c] = std::exp(in[c] - mx));
    for (double& v : o) v /= z;
  }
  const std::size_t ia = a.id();
  return a.tape().record(std::move(out), {a}, [ia](Tape& t, std::size_t self) {
    const Tensor& y = t.value(self);
    Tensor g = t.upstream(self);
    for (std::size_t r = 0; r < g.rows(); ++r) {
      auto gr = g.row(r);
      auto yr = y.row(r);
      double dot = 0.0;
      for (std::size_t c = 0; c < gr.size(); ++c) dot += gr[c] * yr[c];
      for (std::size_t c = 0; c < gr.size(); ++c) gr[c] = yr[c] * (gr[c] - dot);
    }
    t.accumulate(ia, g);
  });
}

Var log_softmax_rows(Var a) {
  const Tensor& x = a.value();
  Tensor out(x.rows(), x.cols());
  for (std::size_t r = 0; r < x.rows(); ++r) {
    auto in = x.row(r);
    auto o = out.row(r);
    const double mx = in.empty() ? 0.0 : *std::max_element(in.begin(), in.end());
    double z = 0.0;
    for (double v : in) z += std::exp(v - mx);
    const double lse = mx + std::log(z);
    for (std::size_t c = 0; c < in.size(); ++c) o[c] = in[c] - lse;
  }
  const std::size_t ia = a.id();
  return a.tape().record(std::move(out), {a}, [ia](Tape& t, std::size_t self) {
    const Tensor& y = t.value(self);
    Tensor g = t.upstream(self);
    for (std::size_t r = 0; r < g.rows(); ++r) {
      auto gr = g.row(r);
      auto yr = y.row(r);
      double total = 0.0;
      for (double v : gr) total += v;
      for (std::size_t c = 0; c < gr.size(); ++c) gr[c] -= std::exp(yr[c]) * total;
    }
    t.accumulate(ia, g);
  });
}

Var concat_cols(const std::vector<Var>& parts) {
  if (parts.empty()) throw ContractError("concat_cols: no inputs");
  const std::size_t rows = parts.front().rows();
  std::size_t cols = 0;
  for (const Var& p : parts) {
    if (p.rows() != rows) {
      throw ShapeError("concat_cols: shape mismatch " + shape_string(parts.front().value()) +
                       " vs " + shape_string(p.value()));
    }
    cols += p.cols();
  }
  Tensor out(rows, cols);
  std::vector<std::size_t> ids, widths;
  std::size_t offset = 0;
  for (const Var& p : parts) {
    const Tensor& v = p.value();
    for (std::size_t r = 0; r < rows; ++r) {
      std::copy(v.row(r).begin(), v.row(r).end(), out.row(r).begin() + offset);
    }
    ids.push_back(p.id());
    widths.push_back(v.cols());
    offset += v.cols();
  }
  return parts.front().tape().record(
      std::move(out), parts, [ids, widths](Tape& t, std::size_t self) {
        const Tensor& g = t.upstream(self);
        std::size_t off = 0;
        for (std::size_t k = 0; k < ids.size(); ++k) {
          if (t.requires_grad(ids[k])) {
            Tensor part(g.rows(), widths[k]);
            for (std::size_t r = 0; r < g.rows(); ++r) {
              auto src = g.row(r).subspan(off, widths[k]);
              std::copy(src.begin(), src.end(), part.row(r).begin());
            }
            t.accumulate(ids[k], part);
          }
          off += widths[k];
        }
      });
}

Var slice_cols(Var a, std::size_t begin, std::size_t end) {
  const Tensor& x = a.value();
  if (begin > end || end > x.cols()) {
    throw ShapeError("slice_cols: range [" + std::to_string(begin) + "," + std::to_string(end) +
                     ") invalid for " + shape_string(x));
  }
  Tensor out(x.rows(), end - begin);
  for (std::size_t r = 0; r < x.rows(); ++r) {
    auto src = x.row(r).subspan(begin, end - begin);
    std::copy(src.begin(), src.end(), out.row(r).begin());
  }
  const std::size_t ia = a.id();
  const std::size_t cols = x.cols();
  return a.tape().record(std::move(out), {a}, [ia, begin, cols](Tape& t, std::size_t self) {
    const Tensor& g = t.upstream(self);
    Tensor full(g.rows(), cols);
    for (std::size_t r = 0; r < g.rows(); ++r) {
      std::copy(g.row(r).begin(), g.row(r).end(), full.row(r).begin() + begin);
    }
    t.accumulate(ia, full);
  });
}

Var gather_rows(Var a, std::vector<std::size_t> rows) {
  Tensor out = autost::gather_rows(a.value(), rows);
  const std::size_t ia = a.id();
  const std::size_t n = a.rows();
  return a.tape().record(std::move(out), {a},
                         [ia, n, rows = std::move(rows)](Tape& t, std::size_t self) {
                           const Tensor& g = t.upstream(self);
                           Tensor full(n, g.cols());
                           for (std::size_t r = 0; r < rows.size(); ++r) {
                             auto dst = full.row(rows[r]);
                             auto src = g.row(r);
                             for (std::size_t c = 0; c < src.size(); ++c) dst[c] += src[c];
                           }
                           t.accumulate(ia, full);
                         });
}

Var sum(Var a) {
  double s = 0.0;
  for (double v : a.value().data()) s += v;
  const std::size_t ia = a.id();
  const std::size_t r = a.rows(), c = a.cols();
  return a.tape().record(Tensor::scalar(s), {a}, [ia, r, c](Tape& t, std::size_t self) {
    t.accumulate(ia, Tensor(r, c, t.upstream(self).item()));
  });
}

Var mean(Var a) {
  const std::size_t n = a.value().size();
  if (n == 0) throw ShapeError("mean: empty tensor " + shape_string(a.value()));
  return scale(sum(a), 1.0 / static_cast<double>(n));
}

Var row_sum(Var a) {
  const Tensor& x = a.value();
  Tensor out(x.rows(), 1);
  for (std::size_t r = 0; r < x.rows(); ++r) {
    double s = 0.0;
    for (double v : x.row(r)) s += v;
    out(r, 0) = s;
  }
  const std::size_t ia = a.id();
  const std::size_t cols = x.cols();
  return a.tape().record(std::move(out), {a}, [ia, cols](Tape& t, std::size_t self) {
    const Tensor& g = t.upstream(self);
    Tensor full(g.rows(), cols);
    for (std::size_t r = 0; r < g.rows(); ++r) {
      for (double& v : full.row(r)) v = g(r, 0);
    }
    t.accumulate(ia, full);
  });
}

Var diag(Var a) {
  const Tensor& x = a.value();
  if (x.rows() != x.cols()) throw ShapeError("diag: matrix not square " + shape_string(x));
  Tensor out(x.rows(), 1);
  for (std::size_t i = 0; i < x.rows(); ++i) out(i, 0) = x(i, i);
  const std::size_t ia = a.id();
  const std::size_t n = x.rows();
  return a.tape().record(std::move(out), {a}, [ia, n](Tape& t, std::size_t self) {
    const Tensor& g = t.upstream(self);
    Tensor full(n, n);
    for (std::size_t i = 0; i < n; ++i) full(i, i) = g(i, 0);
    t.accumulate(ia, full);
  });
}

Var normalize_rows(Var a) {
  const Tensor& x = a.value();
  Tensor out(x.rows(), x.cols());
  std::vector<double> norms(x.rows());
  for (std::size_t r = 0; r < x.rows(); ++r) {
    double s = 0.0;
    for (double v : x.row(r)) s += v * v;
    norms[r] = std::sqrt(s);
    if (norms[r] == 0.0) continue;
    auto o = out.row(r);
    auto in = x.row(r);
    for (std::size_t c = 0; c < in.size(); ++c) o[c] = in[c] / norms[r];
  }
  const std::size_t ia = a.id();
  return a.tape().record(std::move(out), {a},
                         [ia, norms = std::move(norms)](Tape& t, std::size_t self) {
                           const Tensor& y = t.value(self);
                           Tensor g = t.upstream(self);
                           for (std::size_t r = 0; r < g.rows(); ++r) {
                             auto gr = g.row(r);
                             if (norms[r] == 0.0) {
                               std::fill(gr.begin(), gr.end(), 0.0);
                               continue;
                             }
                             auto yr = y.row(r);
                             double dot = 0.0;
                             for (std::size_t c = 0; c < gr.size(); ++c) dot += gr[c] * yr[c];
                             for (std::size_t c = 0; c < gr.size(); ++c) {
                               gr[c] = (gr[c] - yr[c] * dot) / norms[r];
                             }
                           }
                           t.accumulate(ia, g);
                         });
}

Var cosine_similarity(Var a, Var b) {
  require_same_shape(a.value(), b.value(), "cosine_similarity");
  return row_sum(mul(normalize_rows(a), normalize_rows(b)));
}

Var cosine_matrix(Var a, Var b) {
  if (a.cols() != b.cols()) {
    throw ShapeError("cosine_matrix: shape mismatch " + shape_string(a.value()) + " vs " +
                     shape_string(b.value()));
  }
  return matmul_nt(normalize_rows(a), normalize_rows(b));
}

}  // namespace autost
