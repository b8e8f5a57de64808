// Copyright 2026 The vislab Authors
// SPDX-License-Identifier: Apache-2.0
#include "fft.hpp"

#include <fftw3.h>

#include <map>
#include <memory>
#include <mutex>
#include <vector>

#include "vislab/error.hpp"

namespace vislab::detail {
namespace {

struct PlanPair {
  fftw_plan forward = nullptr;
  fftw_plan inverse = nullptr;
  ~PlanPair() {
    if (forward) fftw_destroy_plan(forward);
    if (inverse) fftw_destroy_plan(inverse);
  }
};

// FFTW's planner is not re-entrant; plan creation is serialized here.
const PlanPair& plans_for(int n) {
  static std::mutex mutex;
  static std::map<int, std::unique_ptr<PlanPair>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[n];
  if (!slot) {
    std::vector<std::complex<double>> scratch(static_cast<std::size_t>(n) * n);
    auto* buf = reinterpret_cast<fftw_complex*>(scratch.data());
    auto pair = std::make_unique<PlanPair>();
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    pair->forward = fftw_plan_dft_2d(n, n, buf, buf, FFTW_FORWARD, flags);
    pair->inverse = fftw_plan_dft_2d(n, n, buf, buf, FFTW_BACKWARD, flags);
    if (!pair->forward || !pair->inverse) throw NumericalError("FFTW plan creation failed");
    slot = std::move(pair);
  }
  return *slot;
}

void execute(fftw_plan plan, int n, std::span<std::complex<double>> data) {
  if (data.size() != static_cast<std::size_t>(n) * n) {
    throw InvalidArgument("fft: buffer size does not match n*n");
  }
  auto* buf = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(plan, buf, buf);
}

}  // namespace

void fft_forward(int n, std::span<std::complex<double>> data) {
  execute(plans_for(n).forward, n, data);
}

void fft_inverse(int n, std::span<std::complex<double>> data) {
  execute(plans_for(n).inverse, n, data);
}

}  // namespace vislab::detail
