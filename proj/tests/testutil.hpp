#pragma once

#include <unistd.h>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "kgrumor/ops.hpp"

namespace testutil {

// Central finite differences against reverse-mode gradients. build_loss must
// rebuild the whole graph from the current parameter values on every call.
// Returns the max relative error over every coordinate of every parameter,
// with |ad - fd| / max(|ad|, |fd|, 1).
inline double max_fd_rel_error(const std::function<kgrumor::nn::Tensor()>& build_loss,
                               const std::vector<kgrumor::nn::Tensor*>& params,
                               double step = 1e-6) {
  using namespace kgrumor::nn;
  for (auto* p : params) p->zero_grad();
  backward(build_loss());

  std::vector<std::vector<double>> ad;
  for (auto* p : params) ad.push_back(p->grad());

  double worst = 0.0;
  NoGradGuard guard;
  for (size_t pi = 0; pi < params.size(); ++pi) {
    auto& values = params[pi]->data();
    for (size_t i = 0; i < values.size(); ++i) {
      const double saved = values[i];
      values[i] = saved + step;
      const double up = build_loss().item();
      values[i] = saved - step;
      const double down = build_loss().item();
      values[i] = saved;
      const double fd = (up - down) / (2.0 * step);
      const double g = ad[pi][i];
      const double rel = std::abs(g - fd) / std::max({std::abs(g), std::abs(fd), 1.0});
      worst = std::max(worst, rel);
    }
  }
  return worst;
}

// Unique scratch directory, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    const auto base = std::filesystem::temp_directory_path();
    path_ = base / ("kgrumor_test_" + std::to_string(::getpid()) + "_" +
                    std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }

  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  out << content;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

}  // namespace testutil
