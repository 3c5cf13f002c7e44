// SPDX-License-Identifier: Apache-2.0
#include <array>
#include <cstdint>
#include <filesystem>
#include <vector>

#include <doctest.h>

#include "twingrid/rng.hpp"
#include "twingrid/telemetry/frame.hpp"

using namespace twingrid;
using namespace twingrid::telemetry;

TEST_CASE("golden frame encodes to the pinned byte layout") {
  const MeasurementFrame frame{1, 1.0f, 0};
  const auto bytes = encode_frame(frame);
  const std::array<std::uint8_t, kFrameSize> expected = {
      0x68, 0x11, 0x0D, 0x01, 0x00, 0x00, 0x00, 0x00, 0x80, 0x3F,
      0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0xB3};
  CHECK(bytes == expected);
}

TEST_CASE("zero value frame has the XOR of type and address as checksum") {
  const MeasurementFrame frame{1, 0.0f, 0};
  const auto bytes = encode_frame(frame);
  CHECK(bytes[18] == (0x0D ^ 0x01));
}

TEST_CASE("decode inverts encode on the golden frame") {
  const MeasurementFrame frame{1, 1.0f, 0};
  const auto bytes = encode_frame(frame);
  const auto decoded = decode_frame(bytes.data(), bytes.size());
  CHECK(decoded == frame);
}

TEST_CASE("encode validates the channel range") {
  CHECK_THROWS_AS(encode_frame({0, 1.0f, 0}), ValidationError);
  CHECK_THROWS_AS(encode_frame({0x1000000u, 1.0f, 0}), ValidationError);
  CHECK_NOTHROW(encode_frame({0xFFFFFFu, 1.0f, 0}));
}

TEST_CASE("round trip holds for randomized frames") {
  Rng rng(301);
  for (int trial = 0; trial < 2000; ++trial) {
    MeasurementFrame frame;
    frame.channel = 1 + static_cast<std::uint32_t>(rng.uniform_int(0xFFFFFF));
    frame.value = static_cast<float>(2e6 * rng.uniform() - 1e6);
    frame.timestamp = rng.uniform_int(std::uint64_t{1} << 48);
    const auto bytes = encode_frame(frame);
    CHECK(decode_frame(bytes.data(), bytes.size()) == frame);
  }
}

TEST_CASE("decode distinguishes framing, truncation, and integrity errors") {
  const auto bytes = encode_frame({7, -3.25f, 123456789});

  SUBCASE("bad start byte") {
    auto bad = bytes;
    bad[0] = 0x69;
    CHECK_THROWS_AS(decode_frame(bad.data(), bad.size()), FramingError);
  }
  SUBCASE("bad length byte") {
    auto bad = bytes;
    bad[1] = 0x12;
    CHECK_THROWS_AS(decode_frame(bad.data(), bad.size()), FramingError);
  }
  SUBCASE("short buffer") {
    CHECK_THROWS_AS(decode_frame(bytes.data(), 10), TruncationError);
    CHECK_THROWS_AS(decode_frame(bytes.data(), 0), TruncationError);
    CHECK_THROWS_AS(decode_frame(bytes.data(), 18), TruncationError);
  }
  SUBCASE("flipped checksum byte") {
    auto bad = bytes;
    bad[18] = static_cast<std::uint8_t>(bad[18] ^ 0x01);
    CHECK_THROWS_AS(decode_frame(bad.data(), bad.size()), IntegrityError);
  }
  SUBCASE("corrupted type id fails the checksum first") {
    auto bad = bytes;
    bad[2] = 0x0E;
    CHECK_THROWS_AS(decode_frame(bad.data(), bad.size()), IntegrityError);
  }
}

TEST_CASE("every single-bit corruption of the covered payload is detected") {
  const auto bytes = encode_frame({42, 17.5f, 987654321});
  for (std::size_t byte = 2; byte <= 17; ++byte) {
    for (int bit = 0; bit < 8; ++bit) {
      auto bad = bytes;
      bad[byte] = static_cast<std::uint8_t>(bad[byte] ^ (1u << bit));
      CHECK_THROWS_AS(decode_frame(bad.data(), bad.size()), IntegrityError);
    }
  }
}

TEST_CASE("frame streams parse by repeated fixed-length reads") {
  Rng rng(302);
  std::vector<MeasurementFrame> frames;
  for (int i = 0; i < 64; ++i) {
    frames.push_back({1 + static_cast<std::uint32_t>(rng.uniform_int(8)),
                      static_cast<float>(rng.normal()),
                      static_cast<std::uint64_t>(i) * 100});
  }
  const auto bytes = encode_stream(frames);
  CHECK(bytes.size() == 64 * kFrameSize);
  CHECK(decode_stream(bytes) == frames);

  auto trailing = bytes;
  trailing.resize(trailing.size() - 5);
  CHECK_THROWS_AS(decode_stream(trailing), TruncationError);
}

TEST_CASE("tmf files round-trip through the filesystem") {
  const auto path = std::filesystem::temp_directory_path() / "twingrid_frames_test.tmf";
  std::vector<MeasurementFrame> frames = {{1, 1.5f, 0}, {8, -2.5f, 100}, {3, 0.0f, 200}};
  write_tmf(path, frames);
  CHECK(read_tmf(path) == frames);
  std::filesystem::remove(path);
  CHECK_THROWS_AS(read_tmf(path), IoError);
}

TEST_CASE("channel registry is the fixed bijection over the eight IED channels") {
  CHECK(channel_name(1) == "p_pv");
  CHECK(channel_name(8) == "q_n");
  CHECK(channel_ioa("p_batt") == 3);
  CHECK(channel_ioa("q_w") == 6);
  for (std::uint32_t ioa = 1; ioa <= kChannelCount; ++ioa) {
    CHECK(channel_ioa(channel_name(ioa)) == ioa);
  }
  CHECK_THROWS_AS(channel_name(0), ValidationError);
  CHECK_THROWS_AS(channel_name(9), ValidationError);
  CHECK_THROWS_AS(channel_ioa("p_unknown"), ValidationError);
}
