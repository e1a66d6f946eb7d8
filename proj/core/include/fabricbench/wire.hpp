#pragma once

#include <array>
#include <cstdint>
#include <string>

namespace fabricbench {

// Frame layout, all multi-byte fields big-endian:
//   magic "ZHB1" | type u8 | seq u64 | payload_len u32 | payload
inline constexpr std::array<unsigned char, 4> kWireMagic = {'Z', 'H', 'B', '1'};
inline constexpr std::size_t kWireHeaderSize = 17;
inline constexpr std::uint32_t kMaxPayload = 1u << 30;

enum class MsgType : std::uint8_t {
  Hello = 1,
  Plan = 2,
  Start = 3,
  Ping = 4,
  Pong = 5,
  Result = 6,
  Bye = 7,
};

struct WireMessage {
  MsgType type = MsgType::Hello;
  std::uint64_t seq = 0;
  std::string payload;
};

std::array<unsigned char, kWireHeaderSize> encode_header(MsgType type, std::uint64_t seq,
                                                         std::uint32_t payload_len);

struct WireHeader {
  MsgType type;
  std::uint64_t seq;
  std::uint32_t payload_len;
};

// Throws ProtocolError on bad magic, unknown type, or oversized payload.
WireHeader decode_header(const unsigned char* bytes);

std::string encode_message(const WireMessage& msg);

const char* msg_type_name(MsgType type);

}  // namespace fabricbench
