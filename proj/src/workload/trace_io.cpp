#include <array>
#include <cstring>
#include <fstream>

#include "tiersim/error.hpp"
#include "tiersim/workload/workload.hpp"

namespace tiersim {

namespace {

constexpr std::array<char, 8> kMagic = {'T', 'S', 'T', 'R', 'A', 'C', 'E', '1'};

template <typename T>
void put(std::ostream& out, T value) {
  std::array<char, sizeof(T)> buf{};
  for (std::size_t i = 0; i < sizeof(T); ++i) buf[i] = static_cast<char>((static_cast<std::uint64_t>(value) >> (8 * i)) & 0xff);
  out.write(buf.data(), buf.size());
}

template <typename T>
T get(std::istream& in, const char* what) {
  std::array<unsigned char, sizeof(T)> buf{};
  if (!in.read(reinterpret_cast<char*>(buf.data()), buf.size()))
    throw Error(ErrorKind::Parse, std::string("trace truncated while reading ") + what);
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
  return static_cast<T>(v);
}

}  // namespace

void write_trace(const std::filesystem::path& path, const Trace& trace) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot open '" + path.string() + "' for writing");
  out.write(kMagic.data(), kMagic.size());
  put<std::uint64_t>(out, trace.records.size());
  put<std::uint32_t>(out, static_cast<std::uint32_t>(trace.phases.size()));
  for (const auto& p : trace.phases) {
    if (p.name.size() > 0xffff) throw Error(ErrorKind::InvalidArgument, "phase name too long");
    put<std::uint64_t>(out, p.start_index);
    put<std::uint64_t>(out, p.end_index);
    put<std::uint8_t>(out, p.timed ? 1 : 0);
    put<std::uint16_t>(out, static_cast<std::uint16_t>(p.name.size()));
    out.write(p.name.data(), static_cast<std::streamsize>(p.name.size()));
  }
  std::vector<char> buf;
  buf.reserve(trace.records.size() * 9);
  for (const auto& r : trace.records) {
    const std::uint64_t page = r.page;
    for (int i = 0; i < 8; ++i) buf.push_back(static_cast<char>((page >> (8 * i)) & 0xff));
    buf.push_back(static_cast<char>(r.kind));
  }
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) throw Error(ErrorKind::Io, "write to '" + path.string() + "' failed");
}

Trace read_trace(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open trace '" + path.string() + "'");
  std::array<char, 8> magic{};
  if (!in.read(magic.data(), magic.size()) || magic != kMagic)
    throw Error(ErrorKind::Parse, "'" + path.string() + "' is not a trace file");
  Trace t;
  const auto count = get<std::uint64_t>(in, "record count");
  const auto nphases = get<std::uint32_t>(in, "phase count");
  for (std::uint32_t i = 0; i < nphases; ++i) {
    Phase p;
    p.start_index = get<std::uint64_t>(in, "phase start");
    p.end_index = get<std::uint64_t>(in, "phase end");
    p.timed = get<std::uint8_t>(in, "phase flag") != 0;
    const auto len = get<std::uint16_t>(in, "phase name length");
    p.name.resize(len);
    if (len > 0 && !in.read(p.name.data(), len)) throw Error(ErrorKind::Parse, "trace truncated in phase name");
    t.phases.push_back(std::move(p));
  }
  std::vector<unsigned char> buf(count * 9);
  if (count > 0 && !in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size())))
    throw Error(ErrorKind::Parse, "trace truncated in records");
  t.records.resize(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    std::uint64_t page = 0;
    for (int b = 0; b < 8; ++b) page |= static_cast<std::uint64_t>(buf[i * 9 + b]) << (8 * b);
    const unsigned char kind = buf[i * 9 + 8];
    if (kind > 1) throw Error(ErrorKind::Parse, "invalid access kind in trace");
    if (page > 0xffffffffull) throw Error(ErrorKind::Parse, "page id out of range in trace");
    t.records[i] = {static_cast<std::uint32_t>(page), static_cast<AccessKind>(kind)};
  }
  return t;
}

}  // namespace tiersim
