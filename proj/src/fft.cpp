#include "floq/fft.hpp"

#include <fftw3.h>

#include <map>
#include <stdexcept>

namespace floq::fft {

namespace {

// Plans are cached per (size, direction). FFTW planning is not reentrant;
// all transforms here run on the caller's thread.
fftw_plan plan_for(int n, int sign) {
  static std::map<std::pair<int, int>, fftw_plan> cache;
  auto key = std::make_pair(n, sign);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  std::vector<cd> buf(n);
  fftw_plan p = fftw_plan_dft_1d(n, reinterpret_cast<fftw_complex*>(buf.data()),
                                 reinterpret_cast<fftw_complex*>(buf.data()),
                                 sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
  cache.emplace(key, p);
  return p;
}

void execute(std::vector<cd>& a, int sign) {
  if (a.empty()) throw std::invalid_argument("fft: empty input");
  fftw_plan p = plan_for(static_cast<int>(a.size()), sign);
  fftw_execute_dft(p, reinterpret_cast<fftw_complex*>(a.data()),
                   reinterpret_cast<fftw_complex*>(a.data()));
}

}  // namespace

void forward(std::vector<cd>& a) {
  execute(a, FFTW_FORWARD);
  const double scale = 1.0 / static_cast<double>(a.size());
  for (auto& v : a) v *= scale;
}

void inverse(std::vector<cd>& a) { execute(a, FFTW_BACKWARD); }

void forward_2d(std::vector<cd>& a, int n0, int n1) {
  if (static_cast<int>(a.size()) != n0 * n1)
    throw std::invalid_argument("forward_2d: size mismatch");
  fftw_plan p = fftw_plan_dft_2d(n0, n1, reinterpret_cast<fftw_complex*>(a.data()),
                                 reinterpret_cast<fftw_complex*>(a.data()),
                                 FFTW_FORWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
  fftw_execute(p);
  fftw_destroy_plan(p);
  const double scale = 1.0 / (static_cast<double>(n0) * n1);
  for (auto& v : a) v *= scale;
}

int next_pow2(int n) {
  int p = 1;
  while (p < n) p *= 2;
  return p;
}

}  // namespace floq::fft
