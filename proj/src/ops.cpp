#include "kgrumor/ops.hpp"

#include <cmath>

namespace kgrumor {
namespace nn {

namespace {

void check_same_shape(const char* op, const Tensor& a, const Tensor& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw std::runtime_error(std::string(op) + ": shape mismatch");
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
  check_same_shape("add", a, b);
  Tensor out = make_op(a.rows(), a.cols(), {a.node(), b.node()});
  const auto& av = a.data();
  const auto& bv = b.data();
  auto& ov = out.data();
  for (size_t i = 0; i < ov.size(); ++i) ov[i] = av[i] + bv[i];
  if (out.requires_grad()) {
    out.node()->backward_fn = [](Node& o) {
      for (int s = 0; s < 2; ++s) {
        Node& p = *o.parents[s];
        if (!p.requires_grad) continue;
        for (size_t i = 0; i < o.grad.size(); ++i) p.grad[i] += o.grad[i];
      }
    };
  }
  return out;
}

Tensor sub(const Tensor& a, const Tensor& b) {
  check_same_shape("sub", a, b);
  Tensor out = make_op(a.rows(), a.cols(), {a.node(), b.node()});
  const auto& av = a.data();
  const auto& bv = b.data();
  auto& ov = out.data();
  for (size_t i = 0; i < ov.size(); ++i) ov[i] = av[i] - bv[i];
  if (out.requires_grad()) {
    out.node()->backward_fn = [](Node& o) {
      Node& pa = *o.parents[0];
      Node& pb = *o.parents[1];
      if (pa.requires_grad)
        for (size_t i = 0; i < o.grad.size(); ++i) pa.grad[i] += o.grad[i];
      if (pb.requires_grad)
        for (size_t i = 0; i < o.grad.size(); ++i) pb.grad[i] -= o.grad[i];
    };
  }
  return out;
}

Tensor mul(const Tensor& a, const Tensor& b) {
  check_same_shape("mul", a, b);
  Tensor out = make_op(a.rows(), a.cols(), {a.node(), b.node()});
  const auto& av = a.data();
  const auto& bv = b.data();
  auto& ov = out.data();
  for (size_t i = 0; i < ov.size(); ++i) ov[i] = av[i] * bv[i];
  if (out.requires_grad()) {
    out.node()->backward_fn = [](Node& o) {
      Node& pa = *o.parents[0];
      Node& pb = *o.parents[1];
      if (pa.requires_grad)
        for (size_t i = 0; i < o.grad.size(); ++i) pa.grad[i] += o.grad[i] * pb.value[i];
      if (pb.requires_grad)
        for (size_t i = 0; i < o.grad.size(); ++i) pb.grad[i] += o.grad[i] * pa.value[i];
    };
  }
  return out;
}

Tensor scale(const Tensor& a, double s) {
  Tensor out = make_op(a.rows(), a.cols(), {a.node()});
  const auto& av = a.data();
  auto& ov = out.data();
  for (size_t i = 0; i < ov.size(); ++i) ov[i] = av[i] * s;
  if (out.requires_grad()) {
    out.node()->backward_fn = [s](Node& o) {
      Node& p = *o.parents[0];
      for (size_t i = 0; i < o.grad.size(); ++i) p.grad[i] += o.grad[i] * s;
    };
  }
  return out;
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.cols() != b.rows()) throw std::runtime_error("matmul: inner dim mismatch");
  const int m = a.rows(), k = a.cols(), n = b.cols();
  Tensor out = make_op(m, n, {a.node(), b.node()});
  const double* A = a.data().data();
  const double* B = b.data().data();
  double* O = out.data().data();
  for (int i = 0; i < m; ++i) {
    for (int p = 0; p < k; ++p) {
      const double aip = A[i * k + p];
      if (aip == 0.0) continue;
      const double* brow = B + p * n;
      double* orow = O + i * n;
      for (int j = 0; j < n; ++j) orow[j] += aip * brow[j];
    }
  }
  if (out.requires_grad()) {
    out.node()->backward_fn = [m, k, n](Node& o) {
      Node& pa = *o.parents[0];
      Node& pb = *o.parents[1];
      if (pa.requires_grad) {
        // dA = dO x B^T, via row dots over contiguous B rows
        for (int i = 0; i < m; ++i)
          for (int p = 0; p < k; ++p) {
            double s = 0.0;
            const double* go = o.grad.data() + i * n;
            const double* brow = pb.value.data() + p * n;
            for (int j = 0; j < n; ++j) s += go[j] * brow[j];
            pa.grad[i * k + p] += s;
          }
      }
      if (pb.requires_grad) {
        // dB = A^T x dO
        for (int i = 0; i < m; ++i)
          for (int p = 0; p < k; ++p) {
            const double aip = pa.value[i * k + p];
            if (aip == 0.0) continue;
            const double* go = o.grad.data() + i * n;
            double* gb = pb.grad.data() + p * n;
            for (int j = 0; j < n; ++j) gb[j] += aip * go[j];
          }
      }
    };
  }
  return out;
}

Tensor matmul_nt(const Tensor& a, const Tensor& b) {
  if (a.cols() != b.cols()) throw std::runtime_error("matmul_nt: inner dim mismatch");
  const int m = a.rows(), k = a.cols(), n = b.rows();
  Tensor out = make_op(m, n, {a.node(), b.node()});
  const double* A = a.data().data();
  const double* B = b.data().data();
  double* O = out.data().data();
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) {
      double s = 0.0;
      const double* arow = A + i * k;
      const double* brow = B + j * k;
      for (int p = 0; p < k; ++p) s += arow[p] * brow[p];
      O[i * n + j] = s;
    }
  if (out.requires_grad()) {
    out.node()->backward_fn = [m, k, n](Node& o) {
      Node& pa = *o.parents[0];
      Node& pb = *o.parents[1];
      if (pa.requires_grad) {
        // dA = dO x B
        for (int i = 0; i < m; ++i)
          for (int j = 0; j < n; ++j) {
            const double g = o.grad[i * n + j];
            if (g == 0.0) continue;
            const double* brow = pb.value.data() + j * k;
            double* ga = pa.grad.data() + i * k;
            for (int p = 0; p < k; ++p) ga[p] += g * brow[p];
          }
      }
      if (pb.requires_grad) {
        // dB = dO^T x A
        for (int i = 0; i < m; ++i)
          for (int j = 0; j < n; ++j) {
            const double g = o.grad[i * n + j];
            if (g == 0.0) continue;
            const double* arow = pa.value.data() + i * k;
            double* gb = pb.grad.data() + j * k;
            for (int p = 0; p < k; ++p) gb[p] += g * arow[p];
          }
      }
    };
  }
  return out;
}

Tensor add_row(const Tensor& a, const Tensor& bias) {
  if (bias.rows() != 1 || bias.cols() != a.cols())
    throw std::runtime_error("add_row: bias must be 1 x cols");
  const int m = a.rows(), n = a.cols();
  Tensor out = make_op(m, n, {a.node(), bias.node()});
  const auto& av = a.data();
  const auto& bv = bias.data();
  auto& ov = out.data();
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) ov[i * n + j] = av[i * n + j] + bv[j];
  if (out.requires_grad()) {
    out.node()->backward_fn = [m, n](Node& o) {
      Node& pa = *o.parents[0];
      Node& pb = *o.parents[1];
      if (pa.requires_grad)
        for (size_t i = 0; i < o.grad.size(); ++i) pa.grad[i] += o.grad[i];
      if (pb.requires_grad)
        for (int i = 0; i < m; ++i)
          for (int j = 0; j < n; ++j) pb.grad[j] += o.grad[i * n + j];
    };
  }
  return out;
}

Tensor softmax_rows(const Tensor& a) {
  const int m = a.rows(), n = a.cols();
  Tensor out = make_op(m, n, {a.node()});
  const auto& av = a.data();
  auto& ov = out.data();
  for (int i = 0; i < m; ++i) {
    double mx = av[i * n];
    for (int j = 1; j < n; ++j) mx = std::max(mx, av[i * n + j]);
    double denom = 0.0;
    for (int j = 0; j < n; ++j) {
      const double e = std::exp(av[i * n + j] - mx);
      ov[i * n + j] = e;
      denom += e;
    }
    for (int j = 0; j < n; ++j) ov[i * n + j] /= denom;
  }
  if (out.requires_grad()) {
    out.node()->backward_fn = [m, n](Node& o) {
      Node& p = *o.parents[0];
      for (int i = 0; i < m; ++i) {
        const double* y = o.value.data() + i * n;
        const double* gy = o.grad.data() + i * n;
        double dot = 0.0;
        for (int j = 0; j < n; ++j) dot += gy[j] * y[j];
        double* gx = p.grad.data() + i * n;
        for (int j = 0; j < n; ++j) gx[j] += y[j] * (gy[j] - dot);
      }
    };
  }
  return out;
}

Tensor gelu(const Tensor& a) {
  // tanh form; smooth everywhere, which finite-difference checks rely on
  constexpr double kRoot2OverPi = 0.7978845608028654;
  Tensor out = make_op(a.rows(), a.cols(), {a.node()});
  const auto& av = a.data();
  auto& ov = out.data();
  for (size_t i = 0; i < ov.size(); ++i) {
    const double x = av[i];
    const double t = std::tanh(kRoot2OverPi * (x + 0.044715 * x * x * x));
    ov[i] = 0.5 * x * (1.0 + t);
  }
  if (out.requires_grad()) {
    out.node()->backward_fn = [](Node& o) {
      Node& p = *o.parents[0];
      for (size_t i = 0; i < o.grad.size(); ++i) {
        const double x = p.value[i];
        const double u = kRoot2OverPi * (x + 0.044715 * x * x * x);
        const double t = std::tanh(u);
        const double du = kRoot2OverPi * (1.0 + 3.0 * 0.044715 * x * x);
        const double d = 0.5 * (1.0 + t) + 0.5 * x * (1.0 - t * t) * du;
        p.grad[i] += o.grad[i] * d;
      }
    };
  }
  return out;
}

Tensor sigmoid(const Tensor& a) {
  Tensor out = make_op(a.rows(), a.cols(), {a.node()});
  const auto& av = a.data();
  auto& ov = out.data();
  for (size_t i = 0; i < ov.size(); ++i) ov[i] = 1.0 / (1.0 + std::exp(-av[i]));
  if (out.requires_grad()) {
    out.node()->backward_fn = [](Node& o) {
      Node& p = *o.parents[0];
      for (size_t i = 0; i < o.grad.size(); ++i) {
        const double y = o.value[i];
        p.grad[i] += o.grad[i] * y * (1.0 - y);
      }
    };
  }
  return out;
}

Tensor layer_norm(const Tensor& a, const Tensor& gain, const Tensor& bias, double eps) {
  const int m = a.rows(), n = a.cols();
  if (gain.rows() != 1 || gain.cols() != n || bias.rows() != 1 || bias.cols() != n)
    throw std::runtime_error("layer_norm: gain/bias must be 1 x cols");
  Tensor out = make_op(m, n, {a.node(), gain.node(), bias.node()});
  const auto& av = a.data();
  const auto& gv = gain.data();
  const auto& bv = bias.data();
  auto& ov = out.data();
  std::vector<double> inv_std(m), means(m);
  for (int i = 0; i < m; ++i) {
    double mu = 0.0;
    for (int j = 0; j < n; ++j) mu += av[i * n + j];
    mu /= n;
    double var = 0.0;
    for (int j = 0; j < n; ++j) {
      const double d = av[i * n + j] - mu;
      var += d * d;
    }
    var /= n;
    const double is = 1.0 / std::sqrt(var + eps);
    means[i] = mu;
    inv_std[i] = is;
    for (int j = 0; j < n; ++j) ov[i * n + j] = (av[i * n + j] - mu) * is * gv[j] + bv[j];
  }
  if (out.requires_grad()) {
    out.node()->backward_fn = [m, n, means, inv_std](Node& o) {
      Node& pa = *o.parents[0];
      Node& pg = *o.parents[1];
      Node& pb = *o.parents[2];
      for (int i = 0; i < m; ++i) {
        const double* x = pa.value.data() + i * n;
        const double* gy = o.grad.data() + i * n;
        const double is = inv_std[i];
        const double mu = means[i];
        // xhat and the two row means the input gradient needs
        double mean_gxh = 0.0, mean_gxh_xh = 0.0;
        for (int j = 0; j < n; ++j) {
          const double xh = (x[j] - mu) * is;
          const double gxh = gy[j] * pg.value[j];
          mean_gxh += gxh;
          mean_gxh_xh += gxh * xh;
          if (pg.requires_grad) pg.grad[j] += gy[j] * xh;
          if (pb.requires_grad) pb.grad[j] += gy[j];
        }
        mean_gxh /= n;
        mean_gxh_xh /= n;
        if (pa.requires_grad) {
          double* gx = pa.grad.data() + i * n;
          for (int j = 0; j < n; ++j) {
            const double xh = (x[j] - mu) * is;
            const double gxh = gy[j] * pg.value[j];
            gx[j] += is * (gxh - mean_gxh - xh * mean_gxh_xh);
          }
        }
      }
    };
  }
  return out;
}

Tensor mean_rows(const Tensor& a) {
  const int m = a.rows(), n = a.cols();
  Tensor out = make_op(1, n, {a.node()});
  const auto& av = a.data();
  auto& ov = out.data();
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) ov[j] += av[i * n + j];
  for (int j = 0; j < n; ++j) ov[j] /= m;
  if (out.requires_grad()) {
    out.node()->backward_fn = [m, n](Node& o) {
      Node& p = *o.parents[0];
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j) p.grad[i * n + j] += o.grad[j] / m;
    };
  }
  return out;
}

Tensor sum_all(const Tensor& a) {
  Tensor out = make_op(1, 1, {a.node()});
  double s = 0.0;
  for (double v : a.data()) s += v;
  out.data()[0] = s;
  if (out.requires_grad()) {
    out.node()->backward_fn = [](Node& o) {
      Node& p = *o.parents[0];
      for (size_t i = 0; i < p.grad.size(); ++i) p.grad[i] += o.grad[0];
    };
  }
  return out;
}

Tensor hcat(const std::vector<Tensor>& parts) {
  if (parts.empty()) throw std::runtime_error("hcat: no parts");
  const int m = parts[0].rows();
  int total = 0;
  std::vector<std::shared_ptr<Node>> parents;
  for (const auto& t : parts) {
    if (t.rows() != m) throw std::runtime_error("hcat: row count mismatch");
    total += t.cols();
    parents.push_back(t.node());
  }
  Tensor out = make_op(m, total, parents);
  auto& ov = out.data();
  int off = 0;
  for (const auto& t : parts) {
    const int n = t.cols();
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < n; ++j) ov[i * total + off + j] = t.data()[i * n + j];
    off += n;
  }
  if (out.requires_grad()) {
    out.node()->backward_fn = [m, total](Node& o) {
      int off2 = 0;
      for (auto& pp : o.parents) {
        Node& p = *pp;
        if (p.requires_grad)
          for (int i = 0; i < m; ++i)
            for (int j = 0; j < p.cols; ++j) p.grad[i * p.cols + j] += o.grad[i * total + off2 + j];
        off2 += p.cols;
      }
    };
  }
  return out;
}

Tensor vcat(const std::vector<Tensor>& parts) {
  if (parts.empty()) throw std::runtime_error("vcat: no parts");
  const int n = parts[0].cols();
  int total = 0;
  std::vector<std::shared_ptr<Node>> parents;
  for (const auto& t : parts) {
    if (t.cols() != n) throw std::runtime_error("vcat: col count mismatch");
    total += t.rows();
    parents.push_back(t.node());
  }
  Tensor out = make_op(total, n, parents);
  auto& ov = out.data();
  int off = 0;
  for (const auto& t : parts) {
    for (int i = 0; i < t.numel(); ++i) ov[off + i] = t.data()[i];
    off += t.numel();
  }
  if (out.requires_grad()) {
    out.node()->backward_fn = [](Node& o) {
      size_t off2 = 0;
      for (auto& pp : o.parents) {
        Node& p = *pp;
        if (p.requires_grad)
          for (size_t i = 0; i < p.grad.size(); ++i) p.grad[i] += o.grad[off2 + i];
        off2 += p.value.size();
      }
    };
  }
  return out;
}

Tensor slice_cols(const Tensor& a, int offset, int len) {
  if (offset < 0 || len <= 0 || offset + len > a.cols())
    throw std::runtime_error("slice_cols: range out of bounds");
  const int m = a.rows(), n = a.cols();
  Tensor out = make_op(m, len, {a.node()});
  auto& ov = out.data();
  const auto& av = a.data();
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < len; ++j) ov[i * len + j] = av[i * n + offset + j];
  if (out.requires_grad()) {
    out.node()->backward_fn = [m, n, offset, len](Node& o) {
      Node& p = *o.parents[0];
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < len; ++j) p.grad[i * n + offset + j] += o.grad[i * len + j];
    };
  }
  return out;
}

Tensor reshape(const Tensor& a, int rows, int cols) {
  if (rows * cols != a.numel()) throw std::runtime_error("reshape: numel mismatch");
  Tensor out = make_op(rows, cols, {a.node()});
  out.data() = a.data();
  if (out.requires_grad()) {
    out.node()->backward_fn = [](Node& o) {
      Node& p = *o.parents[0];
      for (size_t i = 0; i < o.grad.size(); ++i) p.grad[i] += o.grad[i];
    };
  }
  return out;
}

Tensor div_scalar(const Tensor& a, const Tensor& s) {
  if (s.numel() != 1) throw std::runtime_error("div_scalar: divisor must be 1x1");
  const double sv = s.data()[0];
  if (sv == 0.0) throw std::runtime_error("div_scalar: divide by zero");
  Tensor out = make_op(a.rows(), a.cols(), {a.node(), s.node()});
  const auto& av = a.data();
  auto& ov = out.data();
  for (size_t i = 0; i < ov.size(); ++i) ov[i] = av[i] / sv;
  if (out.requires_grad()) {
    out.node()->backward_fn = [sv](Node& o) {
      Node& pa = *o.parents[0];
      Node& ps = *o.parents[1];
      if (pa.requires_grad)
        for (size_t i = 0; i < o.grad.size(); ++i) pa.grad[i] += o.grad[i] / sv;
      if (ps.requires_grad) {
        double acc = 0.0;
        for (size_t i = 0; i < o.grad.size(); ++i) acc += o.grad[i] * pa.value[i];
        ps.grad[0] -= acc / (sv * sv);
      }
    };
  }
  return out;
}

Tensor bce_loss(const Tensor& prob, double target) {
  if (prob.numel() != 1) throw std::runtime_error("bce_loss: probability must be 1x1");
  if (target != 0.0 && target != 1.0) throw std::runtime_error("bce_loss: target must be 0 or 1");
  constexpr double kClamp = 1e-7;
  Tensor out = make_op(1, 1, {prob.node()});
  const double p_raw = prob.data()[0];
  const double p = std::min(1.0 - kClamp, std::max(kClamp, p_raw));
  out.data()[0] = -(target * std::log(p) + (1.0 - target) * std::log(1.0 - p));
  if (out.requires_grad()) {
    const bool clamped = p != p_raw;
    out.node()->backward_fn = [target, p, clamped](Node& o) {
      Node& pp = *o.parents[0];
      if (clamped) return;  // flat where the clamp is active
      pp.grad[0] += o.grad[0] * (p - target) / (p * (1.0 - p));
    };
  }
  return out;
}

}  // namespace nn
}  // namespace kgrumor
