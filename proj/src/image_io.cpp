#include "ptycho/image_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>

namespace ptycho {
namespace detail {

void put_u32le(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_u64le(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_f64le(std::vector<std::uint8_t>& out, double v) {
  put_u64le(out, std::bit_cast<std::uint64_t>(v));
}

std::uint32_t get_u32le(const std::uint8_t* p) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(p[i]) << (8 * i);
  return v;
}

std::uint64_t get_u64le(const std::uint8_t* p) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
  return v;
}

double get_f64le(const std::uint8_t* p) { return std::bit_cast<double>(get_u64le(p)); }

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  in.seekg(0, std::ios::end);
  const auto size = static_cast<std::size_t>(in.tellg());
  in.seekg(0, std::ios::beg);
  std::vector<std::uint8_t> bytes(size);
  if (size > 0) in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(size));
  if (!in) throw std::runtime_error("short read from " + path.string());
  return bytes;
}

void write_file(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("short write to " + path.string());
}

}  // namespace detail

namespace {

using namespace detail;

constexpr char kComplexMagic[5] = {'C', 'I', 'M', 'G', '1'};
constexpr char kRealMagic[5] = {'R', 'I', 'M', 'G', '1'};

template <typename Scalar>
std::vector<std::uint8_t> encode_image(const Image<Scalar>& img, const char (&magic)[5]) {
  constexpr std::size_t values_per_pixel = std::is_same_v<Scalar, Complex> ? 2 : 1;
  std::vector<std::uint8_t> out;
  out.reserve(13 + static_cast<std::size_t>(img.size()) * 8 * values_per_pixel);
  out.insert(out.end(), magic, magic + 5);
  put_u32le(out, static_cast<std::uint32_t>(img.rows()));
  put_u32le(out, static_cast<std::uint32_t>(img.cols()));
  for (Index i = 0; i < img.size(); ++i) {
    if constexpr (values_per_pixel == 2) {
      put_f64le(out, img.data()[i].real());
      put_f64le(out, img.data()[i].imag());
    } else {
      put_f64le(out, img.data()[i]);
    }
  }
  return out;
}

template <typename Scalar>
Image<Scalar> decode_image(const std::uint8_t* data, std::size_t size, const char (&magic)[5]) {
  constexpr std::size_t values_per_pixel = std::is_same_v<Scalar, Complex> ? 2 : 1;
  if (size < 13 || std::memcmp(data, magic, 5) != 0)
    throw std::runtime_error("image decode: bad magic or truncated header");
  const std::uint32_t h = get_u32le(data + 5);
  const std::uint32_t w = get_u32le(data + 9);
  const std::size_t pixels = static_cast<std::size_t>(h) * w;
  if (h == 0 || w == 0) throw std::runtime_error("image decode: empty dimensions");
  if (size != 13 + pixels * 8 * values_per_pixel)
    throw std::runtime_error("image decode: payload size mismatch");
  Image<Scalar> img(static_cast<Index>(h), static_cast<Index>(w));
  const std::uint8_t* p = data + 13;
  for (std::size_t i = 0; i < pixels; ++i) {
    if constexpr (values_per_pixel == 2) {
      const double re = get_f64le(p);
      const double im = get_f64le(p + 8);
      img.data()[i] = Complex(re, im);
      p += 16;
    } else {
      img.data()[i] = get_f64le(p);
      p += 8;
    }
  }
  return img;
}

}  // namespace

std::vector<std::uint8_t> encode_cimg(const ComplexImage& img) { return encode_image(img, kComplexMagic); }

std::vector<std::uint8_t> encode_rimg(const RealImage& img) { return encode_image(img, kRealMagic); }

ComplexImage decode_cimg(const std::uint8_t* data, std::size_t size) {
  return decode_image<Complex>(data, size, kComplexMagic);
}

RealImage decode_rimg(const std::uint8_t* data, std::size_t size) {
  return decode_image<double>(data, size, kRealMagic);
}

void save_cimg(const std::filesystem::path& path, const ComplexImage& img) {
  detail::write_file(path, encode_cimg(img));
}

void save_rimg(const std::filesystem::path& path, const RealImage& img) {
  detail::write_file(path, encode_rimg(img));
}

ComplexImage load_cimg(const std::filesystem::path& path) {
  const auto bytes = detail::read_file(path);
  return decode_cimg(bytes.data(), bytes.size());
}

RealImage load_rimg(const std::filesystem::path& path) {
  const auto bytes = detail::read_file(path);
  return decode_rimg(bytes.data(), bytes.size());
}

}  // namespace ptycho
