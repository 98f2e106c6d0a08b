#include "ptycho/measurement_io.hpp"

#include <cmath>
#include <cstring>
#include <stdexcept>

#include "ptycho/image_io.hpp"

namespace ptycho {
namespace {

using namespace detail;

constexpr char kMagic[6] = {'P', 'M', 'E', 'A', 'S', '1'};

}  // namespace

std::vector<std::uint8_t> encode_measurements(const MeasurementSet& m) {
  validate_geometry(m.geometry);
  if (m.amplitudes.size() != m.geometry.count())
    throw std::invalid_argument("encode_measurements: amplitude count mismatch");
  const Index n = m.geometry.window_n;

  std::vector<std::uint8_t> out;
  out.reserve(64 + m.amplitudes.size() * static_cast<std::size_t>(n) * n * 8);
  out.insert(out.end(), kMagic, kMagic + 6);
  put_u32le(out, static_cast<std::uint32_t>(m.geometry.image_h));
  put_u32le(out, static_cast<std::uint32_t>(m.geometry.image_w));
  put_u32le(out, static_cast<std::uint32_t>(n));
  put_u32le(out, static_cast<std::uint32_t>(m.geometry.count()));
  for (const auto& p : m.geometry.positions) {
    put_u32le(out, static_cast<std::uint32_t>(p[0]));
    put_u32le(out, static_cast<std::uint32_t>(p[1]));
  }
  put_f64le(out, m.alpha);
  out.push_back(m.seed.has_value() ? 0 : 1);
  put_u64le(out, m.seed.value_or(0));
  for (const auto& a : m.amplitudes) {
    if (a.rows() != n || a.cols() != n)
      throw std::invalid_argument("encode_measurements: amplitude shape mismatch");
    for (Index i = 0; i < a.size(); ++i) put_f64le(out, a.data()[i]);
  }
  return out;
}

MeasurementSet decode_measurements(const std::uint8_t* data, std::size_t size, const Probe& probe) {
  if (size < 6 + 16 + 9 || std::memcmp(data, kMagic, 6) != 0)
    throw std::runtime_error("measurement decode: bad magic or truncated header");
  std::size_t off = 6;
  auto need = [&](std::size_t bytes) {
    if (off + bytes > size) throw std::runtime_error("measurement decode: truncated payload");
  };

  MeasurementSet m;
  need(16);
  m.geometry.image_h = get_u32le(data + off);
  m.geometry.image_w = get_u32le(data + off + 4);
  m.geometry.window_n = get_u32le(data + off + 8);
  const std::uint32_t count = get_u32le(data + off + 12);
  off += 16;
  if (count == 0) throw std::runtime_error("measurement decode: no probe positions");

  m.geometry.positions.resize(count);
  need(static_cast<std::size_t>(count) * 8);
  for (std::uint32_t l = 0; l < count; ++l) {
    m.geometry.positions[l] = {static_cast<Index>(get_u32le(data + off)),
                               static_cast<Index>(get_u32le(data + off + 4))};
    off += 8;
  }

  need(9 + 8);
  m.alpha = get_f64le(data + off);
  off += 8;
  const std::uint8_t noiseless = data[off++];
  const std::uint64_t seed = get_u64le(data + off);
  off += 8;
  m.seed = noiseless ? std::optional<std::uint64_t>{} : std::optional<std::uint64_t>{seed};

  const Index n = m.geometry.window_n;
  const std::size_t block = static_cast<std::size_t>(n) * static_cast<std::size_t>(n) * 8;
  if (size - off != block * count) throw std::runtime_error("measurement decode: payload size mismatch");
  m.amplitudes.resize(count);
  for (std::uint32_t l = 0; l < count; ++l) {
    RealImage a(n, n);
    for (Index i = 0; i < a.size(); ++i) {
      const double value = get_f64le(data + off);
      if (!(value >= 0.0) || !std::isfinite(value))
        throw std::runtime_error("measurement decode: negative or non-finite amplitude");
      a.data()[i] = value;
      off += 8;
    }
    m.amplitudes[l] = std::move(a);
  }

  validate_geometry(m.geometry);
  if (probe.size() != n) throw std::runtime_error("measurement decode: probe size mismatch");
  m.probe = probe;
  return m;
}

void save_measurements(const std::filesystem::path& path, const MeasurementSet& m) {
  detail::write_file(path, encode_measurements(m));
}

MeasurementSet load_measurements(const std::filesystem::path& path, const Probe& probe) {
  const auto bytes = detail::read_file(path);
  return decode_measurements(bytes.data(), bytes.size(), probe);
}

}  // namespace ptycho
