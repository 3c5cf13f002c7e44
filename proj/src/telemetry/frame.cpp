// SPDX-License-Identifier: Apache-2.0
#include "twingrid/telemetry/frame.hpp"

#include <bit>
#include <fstream>

namespace twingrid::telemetry {

namespace {

std::uint8_t checksum(const std::uint8_t* bytes) {
  std::uint8_t acc = 0;
  for (std::size_t i = 2; i <= 17; ++i) acc = static_cast<std::uint8_t>(acc ^ bytes[i]);
  return acc;
}

}  // namespace

std::array<std::uint8_t, kFrameSize> encode_frame(const MeasurementFrame& frame) {
  if (frame.channel == 0 || frame.channel > 0xFFFFFFu) {
    throw ValidationError("encode_frame: channel must fit 24 bits and be nonzero");
  }
  std::array<std::uint8_t, kFrameSize> out{};
  out[0] = kStartByte;
  out[1] = kLengthByte;
  out[2] = kTypeMeasuredFloat;
  out[3] = static_cast<std::uint8_t>(frame.channel & 0xFF);
  out[4] = static_cast<std::uint8_t>((frame.channel >> 8) & 0xFF);
  out[5] = static_cast<std::uint8_t>((frame.channel >> 16) & 0xFF);
  const auto value_bits = std::bit_cast<std::uint32_t>(frame.value);
  for (int i = 0; i < 4; ++i) {
    out[6 + static_cast<std::size_t>(i)] = static_cast<std::uint8_t>((value_bits >> (8 * i)) & 0xFF);
  }
  for (int i = 0; i < 8; ++i) {
    out[10 + static_cast<std::size_t>(i)] =
        static_cast<std::uint8_t>((frame.timestamp >> (8 * i)) & 0xFF);
  }
  out[18] = checksum(out.data());
  return out;
}

MeasurementFrame decode_frame(const std::uint8_t* data, std::size_t size) {
  if (size == 0) throw TruncationError("decode_frame: empty buffer");
  if (data[0] != kStartByte) throw FramingError("decode_frame: bad start byte");
  if (size >= 2 && data[1] != kLengthByte) throw FramingError("decode_frame: bad length byte");
  if (size < kFrameSize) {
    throw TruncationError("decode_frame: need 19 bytes, got " + std::to_string(size));
  }
  if (checksum(data) != data[18]) throw IntegrityError("decode_frame: checksum mismatch");
  if (data[2] != kTypeMeasuredFloat) throw FramingError("decode_frame: unknown type id");

  MeasurementFrame frame;
  frame.channel = static_cast<std::uint32_t>(data[3]) |
                  (static_cast<std::uint32_t>(data[4]) << 8) |
                  (static_cast<std::uint32_t>(data[5]) << 16);
  std::uint32_t value_bits = 0;
  for (int i = 0; i < 4; ++i) {
    value_bits |= static_cast<std::uint32_t>(data[6 + i]) << (8 * i);
  }
  frame.value = std::bit_cast<float>(value_bits);
  frame.timestamp = 0;
  for (int i = 0; i < 8; ++i) {
    frame.timestamp |= static_cast<std::uint64_t>(data[10 + i]) << (8 * i);
  }
  return frame;
}

std::vector<std::uint8_t> encode_stream(const std::vector<MeasurementFrame>& frames) {
  std::vector<std::uint8_t> bytes;
  bytes.reserve(frames.size() * kFrameSize);
  for (const auto& frame : frames) {
    const auto encoded = encode_frame(frame);
    bytes.insert(bytes.end(), encoded.begin(), encoded.end());
  }
  return bytes;
}

std::vector<MeasurementFrame> decode_stream(const std::vector<std::uint8_t>& bytes) {
  std::vector<MeasurementFrame> frames;
  frames.reserve(bytes.size() / kFrameSize);
  for (std::size_t off = 0; off < bytes.size(); off += kFrameSize) {
    frames.push_back(decode_frame(bytes.data() + off, bytes.size() - off));
  }
  return frames;
}

void write_tmf(const std::filesystem::path& path, const std::vector<MeasurementFrame>& frames) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("write_tmf: cannot open " + path.string());
  const auto bytes = encode_stream(frames);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write_tmf: write failed for " + path.string());
}

std::vector<MeasurementFrame> read_tmf(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary | std::ios::ate);
  if (!in) throw IoError("read_tmf: cannot open " + path.string());
  const std::streamsize size = in.tellg();
  in.seekg(0);
  std::vector<std::uint8_t> bytes(static_cast<std::size_t>(size));
  if (size > 0) in.read(reinterpret_cast<char*>(bytes.data()), size);
  if (!in) throw IoError("read_tmf: read failed for " + path.string());
  return decode_stream(bytes);
}

namespace {
constexpr std::array<std::string_view, kChannelCount> kChannelNames = {
    "p_pv", "q_pv", "p_batt", "q_batt", "p_w", "q_w", "p_n", "q_n"};
}

const std::array<std::string_view, kChannelCount>& channel_names() { return kChannelNames; }

std::string_view channel_name(std::uint32_t ioa) {
  if (ioa < 1 || ioa > kChannelCount) {
    throw ValidationError("channel_name: unknown IOA " + std::to_string(ioa));
  }
  return kChannelNames[ioa - 1];
}

std::uint32_t channel_ioa(std::string_view name) {
  for (std::size_t i = 0; i < kChannelNames.size(); ++i) {
    if (kChannelNames[i] == name) return static_cast<std::uint32_t>(i + 1);
  }
  throw ValidationError("channel_ioa: unknown channel " + std::string(name));
}

}  // namespace twingrid::telemetry
