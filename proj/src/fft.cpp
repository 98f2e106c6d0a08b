#include "ptycho/fft.hpp"

#include <stdexcept>
#include <vector>

#include <unsupported/Eigen/FFT>

namespace ptycho {
namespace {

// One transform engine per thread; Eigen::FFT caches kissfft plans per length
// internally, and window sizes repeat constantly inside the solvers.
Eigen::FFT<double>& engine() {
  static thread_local Eigen::FFT<double> fft;
  return fft;
}

ComplexImage transform2d(const ComplexImage& in, bool inverse) {
  const Index h = in.rows();
  const Index w = in.cols();
  if (h == 0 || w == 0) throw std::invalid_argument("fft2: empty image");

  auto& fft = engine();
  ComplexImage out(h, w);

  // Rows are contiguous in row-major storage.
  std::vector<Complex> line(static_cast<std::size_t>(w));
  for (Index r = 0; r < h; ++r) {
    const Complex* src = in.data() + r * w;
    if (inverse)
      fft.inv(line.data(), src, w);
    else
      fft.fwd(line.data(), src, w);
    Complex* dst = out.data() + r * w;
    std::copy(line.begin(), line.end(), dst);
  }

  // Columns via gather/scatter.
  std::vector<Complex> col(static_cast<std::size_t>(h));
  std::vector<Complex> col_out(static_cast<std::size_t>(h));
  for (Index c = 0; c < w; ++c) {
    for (Index r = 0; r < h; ++r) col[static_cast<std::size_t>(r)] = out(r, c);
    if (inverse)
      fft.inv(col_out.data(), col.data(), h);
    else
      fft.fwd(col_out.data(), col.data(), h);
    for (Index r = 0; r < h; ++r) out(r, c) = col_out[static_cast<std::size_t>(r)];
  }
  return out;
}

}  // namespace

ComplexImage fft2(const ComplexImage& in) { return transform2d(in, false); }

ComplexImage ifft2(const ComplexImage& in) { return transform2d(in, true); }

}  // namespace ptycho
