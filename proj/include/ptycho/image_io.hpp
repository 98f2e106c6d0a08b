#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "ptycho/types.hpp"

namespace ptycho {

/// "CIMG1"/"RIMG1" containers: 5-byte magic, u32-LE height, u32-LE width,
/// then row-major f64-LE pixels ((re, im) pairs for complex images).

std::vector<std::uint8_t> encode_cimg(const ComplexImage& img);
std::vector<std::uint8_t> encode_rimg(const RealImage& img);

ComplexImage decode_cimg(const std::uint8_t* data, std::size_t size);
RealImage decode_rimg(const std::uint8_t* data, std::size_t size);

void save_cimg(const std::filesystem::path& path, const ComplexImage& img);
void save_rimg(const std::filesystem::path& path, const RealImage& img);
ComplexImage load_cimg(const std::filesystem::path& path);
RealImage load_rimg(const std::filesystem::path& path);

namespace detail {

void put_u32le(std::vector<std::uint8_t>& out, std::uint32_t v);
void put_u64le(std::vector<std::uint8_t>& out, std::uint64_t v);
void put_f64le(std::vector<std::uint8_t>& out, double v);
std::uint32_t get_u32le(const std::uint8_t* p);
std::uint64_t get_u64le(const std::uint8_t* p);
double get_f64le(const std::uint8_t* p);

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes);

}  // namespace detail
}  // namespace ptycho
