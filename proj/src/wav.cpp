#include "storm/wav.hpp"

#include <algorithm>
#include <cstdint>
#include <cstring>
#include <fstream>

namespace storm {

namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;

std::uint32_t read_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint16_t read_u16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

void put_u32(std::string& s, std::uint32_t v) {
  s.push_back(static_cast<char>(v & 0xff));
  s.push_back(static_cast<char>((v >> 8) & 0xff));
  s.push_back(static_cast<char>((v >> 16) & 0xff));
  s.push_back(static_cast<char>((v >> 24) & 0xff));
}

void put_u16(std::string& s, std::uint16_t v) {
  s.push_back(static_cast<char>(v & 0xff));
  s.push_back(static_cast<char>((v >> 8) & 0xff));
}

}  // namespace

Waveform read_wav(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("wav: cannot open " + path);
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  const std::size_t n = bytes.size();

  if (n < 12 || std::memcmp(p, "RIFF", 4) != 0 || std::memcmp(p + 8, "WAVE", 4) != 0)
    throw DataError("wav: not a RIFF/WAVE file: " + path);

  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  const unsigned char* data = nullptr;
  std::uint32_t data_len = 0;

  std::size_t off = 12;
  while (off + 8 <= n) {
    const std::uint32_t chunk_len = read_u32(p + off + 4);
    const unsigned char* body = p + off + 8;
    if (off + 8 + chunk_len > n) throw DataError("wav: truncated chunk in " + path);
    if (std::memcmp(p + off, "fmt ", 4) == 0) {
      if (chunk_len < 16) throw DataError("wav: malformed fmt chunk in " + path);
      format = read_u16(body);
      channels = read_u16(body + 2);
      rate = read_u32(body + 4);
      bits = read_u16(body + 14);
    } else if (std::memcmp(p + off, "data", 4) == 0) {
      data = body;
      data_len = chunk_len;
    }
    off += 8 + chunk_len + (chunk_len & 1);  // chunks are word-aligned
  }

  if (format == 0 || data == nullptr) throw DataError("wav: missing fmt or data chunk in " + path);
  if (channels != 1) throw DataError("wav: only mono files are supported: " + path);

  Waveform w;
  w.sample_rate = static_cast<double>(rate);
  if (format == kFormatPcm && bits == 16) {
    const std::size_t count = data_len / 2;
    w.samples.resize(count);
    for (std::size_t i = 0; i < count; ++i) {
      const auto v = static_cast<std::int16_t>(read_u16(data + 2 * i));
      w.samples[i] = static_cast<double>(v) / 32768.0;
    }
  } else if (format == kFormatFloat && bits == 32) {
    const std::size_t count = data_len / 4;
    w.samples.resize(count);
    for (std::size_t i = 0; i < count; ++i) {
      float f;
      std::memcpy(&f, data + 4 * i, 4);
      w.samples[i] = static_cast<double>(f);
    }
  } else {
    throw DataError("wav: unsupported sample format (need pcm16 or float32): " + path);
  }
  if (!all_finite(w.samples)) throw DataError("wav: non-finite samples in " + path);
  return w;
}

void write_wav(const std::string& path, const Waveform& w, WavFormat format) {
  validate(w);
  const auto count = static_cast<std::uint32_t>(w.samples.size());
  const bool f32 = format == WavFormat::float32;
  const std::uint16_t bytes_per = f32 ? 4 : 2;
  const std::uint32_t data_len = count * bytes_per;
  const auto rate = static_cast<std::uint32_t>(w.sample_rate);

  std::string out;
  out.reserve(44 + data_len);
  out.append("RIFF");
  put_u32(out, 36 + data_len);
  out.append("WAVE");
  out.append("fmt ");
  put_u32(out, 16);
  put_u16(out, f32 ? kFormatFloat : kFormatPcm);
  put_u16(out, 1);
  put_u32(out, rate);
  put_u32(out, rate * bytes_per);
  put_u16(out, bytes_per);
  put_u16(out, f32 ? 32 : 16);
  out.append("data");
  put_u32(out, data_len);

  if (f32) {
    for (double v : w.samples) {
      const auto f = static_cast<float>(v);
      char b[4];
      std::memcpy(b, &f, 4);
      out.append(b, 4);
    }
  } else {
    for (double v : w.samples) {
      const long q = std::lrint(std::clamp(v, -1.0, 1.0) * 32768.0);
      const auto s = static_cast<std::int16_t>(std::clamp(q, -32768L, 32767L));
      put_u16(out, static_cast<std::uint16_t>(s));
    }
  }

  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw DataError("wav: cannot write " + path);
  os.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!os) throw DataError("wav: short write to " + path);
}

}  // namespace storm
