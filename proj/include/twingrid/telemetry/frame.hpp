// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "twingrid/errors.hpp"

namespace twingrid::telemetry {

/// One measured value on the wire: 24-bit information object address,
/// short float payload, millisecond timestamp.
struct MeasurementFrame {
  std::uint32_t channel = 0;  // IOA, 1..2^24-1
  float value = 0.0f;
  std::uint64_t timestamp = 0;  // ms

  friend bool operator==(const MeasurementFrame&, const MeasurementFrame&) = default;
};

inline constexpr std::size_t kFrameSize = 19;
inline constexpr std::uint8_t kStartByte = 0x68;
inline constexpr std::uint8_t kLengthByte = 0x11;
inline constexpr std::uint8_t kTypeMeasuredFloat = 0x0D;

class FramingError : public Error {
 public:
  explicit FramingError(const std::string& message) : Error(ErrorCategory::Validation, message) {}
};

class IntegrityError : public Error {
 public:
  explicit IntegrityError(const std::string& message)
      : Error(ErrorCategory::Validation, message) {}
};

class TruncationError : public Error {
 public:
  explicit TruncationError(const std::string& message)
      : Error(ErrorCategory::Validation, message) {}
};

/// Serializes one frame:
/// [0x68][0x11][0x0D][IOA:3 LE][value: f32 LE][timestamp: u64 LE][XOR of bytes 2..17].
std::array<std::uint8_t, kFrameSize> encode_frame(const MeasurementFrame& frame);

/// Parses and validates one frame. Throws FramingError on a bad start, length,
/// or type byte, TruncationError on a short buffer, IntegrityError on a
/// checksum mismatch.
MeasurementFrame decode_frame(const std::uint8_t* data, std::size_t size);

/// Concatenates frames back to back, no preamble.
std::vector<std::uint8_t> encode_stream(const std::vector<MeasurementFrame>& frames);

/// Splits a concatenated stream by fixed-length reads. A trailing partial
/// frame raises TruncationError.
std::vector<MeasurementFrame> decode_stream(const std::vector<std::uint8_t>& bytes);

/// Frame-stream file I/O (.tmf). Failures raise IoError with path context.
void write_tmf(const std::filesystem::path& path, const std::vector<MeasurementFrame>& frames);
std::vector<MeasurementFrame> read_tmf(const std::filesystem::path& path);

inline constexpr std::size_t kChannelCount = 8;

/// Fixed bijection between IED channel names and information object addresses.
std::string_view channel_name(std::uint32_t ioa);
std::uint32_t channel_ioa(std::string_view name);
const std::array<std::string_view, kChannelCount>& channel_names();

}  // namespace twingrid::telemetry
