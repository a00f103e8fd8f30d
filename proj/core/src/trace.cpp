#include "greenmon/trace.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <iterator>

namespace greenmon {

namespace {

constexpr std::array<char, 8> kMagic = {'G', 'M', 'T', 'R', 'A', 'C', 'E', '1'};
constexpr std::size_t kHeaderSize = 2 + 8;

}  // namespace

TraceWriter::TraceWriter(const std::filesystem::path& path)
    : out_(path, std::ios::binary | std::ios::trunc) {
  if (!out_) throw TraceError("cannot open trace for writing: " + path.string());
  out_.write(kMagic.data(), kMagic.size());
}

void TraceWriter::write(VirtualTime t, std::span<const std::uint8_t> frame) {
  if (frame.size() > 0xFFFF) throw TraceError("frame too long for trace record");
  std::array<char, kHeaderSize> hdr{};
  const auto len = static_cast<std::uint16_t>(frame.size());
  hdr[0] = static_cast<char>(len >> 8);
  hdr[1] = static_cast<char>(len & 0xFF);
  const auto bits = std::bit_cast<std::uint64_t>(t);
  for (int i = 0; i < 8; ++i) hdr[2 + i] = static_cast<char>((bits >> (56 - 8 * i)) & 0xFF);
  out_.write(hdr.data(), hdr.size());
  out_.write(reinterpret_cast<const char*>(frame.data()), static_cast<std::streamsize>(frame.size()));
  if (!out_) throw TraceError("trace write failed");
}

void TraceWriter::flush() {
  out_.flush();
  if (!out_) throw TraceError("trace flush failed");
}

TraceContents read_trace(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw TraceError("cannot open trace: " + path.string());
  const std::vector<std::uint8_t> data{std::istreambuf_iterator<char>(in),
                                       std::istreambuf_iterator<char>()};
  if (data.size() < kMagic.size() || std::memcmp(data.data(), kMagic.data(), kMagic.size()) != 0) {
    throw TraceError("not a trace file: " + path.string());
  }

  TraceContents out;
  std::size_t pos = kMagic.size();
  while (pos < data.size()) {
    if (data.size() - pos < kHeaderSize) {
      out.truncated_tail = true;
      break;
    }
    const std::size_t len = (std::size_t{data[pos]} << 8) | data[pos + 1];
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits = (bits << 8) | data[pos + 2 + i];
    pos += kHeaderSize;
    if (data.size() - pos < len) {
      out.truncated_tail = true;
      break;
    }
    TraceRecord rec;
    rec.t = std::bit_cast<double>(bits);
    rec.frame.assign(data.begin() + static_cast<std::ptrdiff_t>(pos),
                     data.begin() + static_cast<std::ptrdiff_t>(pos + len));
    out.records.push_back(std::move(rec));
    pos += len;
  }
  return out;
}

}  // namespace greenmon
