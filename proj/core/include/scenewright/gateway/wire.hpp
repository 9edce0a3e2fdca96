#pragma once

#include <nlohmann/json.hpp>

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace scenewright::gateway {

enum class MessageType {
  UserRequest,
  Speech,
  Snapshot,
  Event,
  Warning,
  Usage,
  HandPose,
  Pick,
  Release,
  ConfigAck,
  Config,
  Stop,
};

std::string_view to_string(MessageType type) noexcept;
std::optional<MessageType> message_type_from_string(std::string_view name) noexcept;

struct WireMessage {
  MessageType type = MessageType::Warning;
  std::string session_id;
  std::uint64_t sequence = 0;
  nlohmann::json body = nlohmann::json::object();

  [[nodiscard]] nlohmann::json to_json() const;
  friend bool operator==(const WireMessage&, const WireMessage&) = default;
};

inline constexpr std::size_t kFrameHeaderBytes = 4;
inline constexpr std::size_t kMaxFramePayload = std::size_t{16} * 1024 * 1024;

/// Canonical JSON text of the message (the WebSocket body, and the frame
/// payload on TCP).
std::string encode_message(const WireMessage& message);
/// Throws MalformedFrame for anything that is not a well-formed message.
WireMessage decode_message(std::string_view payload);

/// 4-byte big-endian length + canonical JSON. Throws FrameTooLarge.
std::string encode_frame(const WireMessage& message);
/// Exactly one frame. Throws TruncatedFrame, FrameTooLarge, MalformedFrame.
WireMessage decode_frame(std::string_view bytes);

/// Incremental decoder for a byte stream. After an error the offending frame
/// has been dropped and decoding can continue with the next one; oversized
/// frames are skipped as their bytes arrive.
class FrameDecoder {
 public:
  void feed(std::string_view bytes);
  /// The next complete message, nullopt if more bytes are needed. Throws
  /// FrameTooLarge or MalformedFrame for the frame it just consumed.
  std::optional<WireMessage> next();
  [[nodiscard]] std::size_t buffered() const noexcept { return buffer_.size() - offset_; }

 private:
  void compact();

  std::string buffer_;
  std::size_t offset_ = 0;
  std::size_t skip_ = 0;
};

}  // namespace scenewright::gateway
