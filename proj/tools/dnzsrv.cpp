// Reference implementation of the external-denoiser wire protocol, used both
// as a worked example and as the test double for the protocol tests.
//
// Usage: dnzsrv <mode>
//   echo      return the request image unchanged
//   double    return the image scaled by 2
//   tv        apply the built-in TV denoiser at the requested strength
//   truncate  return only half of a valid response (malformed)
//   badmagic  corrupt the response magic (malformed)
//   fail      consume the request and exit nonzero
//   slow      sleep before echoing (for timeout handling)

#include <cerrno>
#include <chrono>
#include <cstdio>
#include <cstring>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include <unistd.h>

#include "ptycho/denoiser.hpp"
#include "ptycho/image_io.hpp"
#include "ptycho/tv.hpp"

using namespace ptycho;

namespace {

std::vector<std::uint8_t> read_all_stdin() {
  std::vector<std::uint8_t> data;
  std::uint8_t buf[65536];
  for (;;) {
    const ssize_t n = ::read(STDIN_FILENO, buf, sizeof(buf));
    if (n < 0) {
      if (errno == EINTR) continue;
      std::exit(2);
    }
    if (n == 0) break;
    data.insert(data.end(), buf, buf + n);
  }
  return data;
}

void write_all_stdout(const std::uint8_t* data, std::size_t size) {
  std::size_t written = 0;
  while (written < size) {
    const ssize_t n = ::write(STDOUT_FILENO, data + written, size - written);
    if (n < 0) {
      if (errno == EINTR) continue;
      std::exit(2);
    }
    written += static_cast<std::size_t>(n);
  }
}

}  // namespace

int main(int argc, char** argv) {
  const std::string mode = argc > 1 ? argv[1] : "echo";

  const auto request = read_all_stdin();
  if (request.size() < 13 || std::memcmp(request.data(), "DNZ1", 4) != 0) {
    std::cerr << "dnzsrv: malformed request\n";
    return 2;
  }
  const std::uint8_t image_mode = request[4];
  const double strength = detail::get_f64le(request.data() + 5);
  const std::uint8_t* payload = request.data() + 13;
  const std::size_t payload_size = request.size() - 13;

  if (mode == "fail") return 3;
  if (mode == "slow") std::this_thread::sleep_for(std::chrono::seconds(10));

  std::vector<std::uint8_t> response;
  if (image_mode == 1) {
    ComplexImage img = decode_cimg(payload, payload_size);
    if (mode == "double") img *= 2.0;
    if (mode == "tv") {
      DenoiserConfig config;
      config.kind = DenoiserKind::tv;
      img = Denoiser(config).denoise(img, strength);
    }
    response = encode_cimg(img);
  } else {
    RealImage img = decode_rimg(payload, payload_size);
    if (mode == "double") img *= 2.0;
    if (mode == "tv") {
      DenoiserConfig config;
      img = tv_prox(img, strength * config.tv_strength_scale, config.tv_max_iter, config.tv_tol);
    }
    response = encode_rimg(img);
  }

  if (mode == "truncate") response.resize(response.size() / 2);
  if (mode == "badmagic" && response.size() >= 5) response[0] = 'X';
  write_all_stdout(response.data(), response.size());
  return 0;
}
