#include "fabricbench/wire.hpp"

#include <cstring>

#include "fabricbench/errors.hpp"

namespace fabricbench {

std::array<unsigned char, kWireHeaderSize> encode_header(MsgType type, std::uint64_t seq,
                                                         std::uint32_t payload_len) {
  std::array<unsigned char, kWireHeaderSize> h;
  std::memcpy(h.data(), kWireMagic.data(), 4);
  h[4] = static_cast<unsigned char>(type);
  for (int i = 0; i < 8; ++i) h[5 + i] = static_cast<unsigned char>(seq >> (8 * (7 - i)));
  for (int i = 0; i < 4; ++i) h[13 + i] = static_cast<unsigned char>(payload_len >> (8 * (3 - i)));
  return h;
}

WireHeader decode_header(const unsigned char* b) {
  if (std::memcmp(b, kWireMagic.data(), 4) != 0) {
    throw ProtocolError("bad frame magic");
  }
  const std::uint8_t type = b[4];
  if (type < 1 || type > 7) {
    throw ProtocolError("unknown message type " + std::to_string(type));
  }
  std::uint64_t seq = 0;
  for (int i = 0; i < 8; ++i) seq = (seq << 8) | b[5 + i];
  std::uint32_t len = 0;
  for (int i = 0; i < 4; ++i) len = (len << 8) | b[13 + i];
  if (len > kMaxPayload) {
    throw ProtocolError("payload length " + std::to_string(len) + " exceeds limit");
  }
  return {static_cast<MsgType>(type), seq, len};
}

std::string encode_message(const WireMessage& msg) {
  const auto header = encode_header(msg.type, msg.seq, static_cast<std::uint32_t>(msg.payload.size()));
  std::string out(reinterpret_cast<const char*>(header.data()), header.size());
  out += msg.payload;
  return out;
}

const char* msg_type_name(MsgType type) {
  switch (type) {
    case MsgType::Hello: return "HELLO";
    case MsgType::Plan: return "PLAN";
    case MsgType::Start: return "START";
    case MsgType::Ping: return "PING";
    case MsgType::Pong: return "PONG";
    case MsgType::Result: return "RESULT";
    case MsgType::Bye: return "BYE";
  }
  return "?";
}

}  // namespace fabricbench
