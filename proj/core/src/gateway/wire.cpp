#include "scenewright/gateway/wire.hpp"

#include "scenewright/canonical_json.hpp"
#include "scenewright/error.hpp"

#include <array>

namespace scenewright::gateway {

namespace {

constexpr std::array<std::pair<MessageType, std::string_view>, 12> kTypes = {{
    {MessageType::UserRequest, "user_request"},
    {MessageType::Speech, "speech"},
    {MessageType::Snapshot, "snapshot"},
    {MessageType::Event, "event"},
    {MessageType::Warning, "warning"},
    {MessageType::Usage, "usage"},
    {MessageType::HandPose, "hand_pose"},
    {MessageType::Pick, "pick"},
    {MessageType::Release, "release"},
    {MessageType::ConfigAck, "config_ack"},
    {MessageType::Config, "config"},
    {MessageType::Stop, "stop"},
}};

std::size_t read_length(std::string_view bytes) {
  return (static_cast<std::size_t>(static_cast<unsigned char>(bytes[0])) << 24) |
         (static_cast<std::size_t>(static_cast<unsigned char>(bytes[1])) << 16) |
         (static_cast<std::size_t>(static_cast<unsigned char>(bytes[2])) << 8) |
         static_cast<std::size_t>(static_cast<unsigned char>(bytes[3]));
}

[[noreturn]] void too_large(std::size_t n) {
  throw Error(ErrorCode::FrameTooLarge,
              std::to_string(n) + " bytes exceeds the " + std::to_string(kMaxFramePayload) + "-byte limit");
}

}  // namespace

std::string_view to_string(MessageType type) noexcept {
  for (const auto& [t, name] : kTypes)
    if (t == type) return name;
  return "warning";
}

std::optional<MessageType> message_type_from_string(std::string_view name) noexcept {
  for (const auto& [t, n] : kTypes)
    if (n == name) return t;
  return std::nullopt;
}

nlohmann::json WireMessage::to_json() const {
  return {{"type", std::string(gateway::to_string(type))},
          {"session_id", session_id},
          {"sequence", sequence},
          {"body", body}};
}

std::string encode_message(const WireMessage& message) { return canonical_dump(message.to_json()); }

WireMessage decode_message(std::string_view payload) {
  const auto doc = nlohmann::json::parse(payload, nullptr, false);
  if (doc.is_discarded()) throw Error(ErrorCode::MalformedFrame, "payload is not JSON");
  if (!doc.is_object()) throw Error(ErrorCode::MalformedFrame, "/: expected object");
  auto type = doc.find("type");
  if (type == doc.end() || !type->is_string()) throw Error(ErrorCode::MalformedFrame, "/type: missing");
  WireMessage m;
  const auto t = message_type_from_string(type->get_ref<const std::string&>());
  if (!t) throw Error(ErrorCode::MalformedFrame, "/type: unknown '" + type->get<std::string>() + "'");
  m.type = *t;
  if (auto s = doc.find("session_id"); s != doc.end()) {
    if (!s->is_string()) throw Error(ErrorCode::MalformedFrame, "/session_id: expected string");
    m.session_id = s->get<std::string>();
  }
  auto seq = doc.find("sequence");
  if (seq == doc.end() || !seq->is_number_unsigned())
    throw Error(ErrorCode::MalformedFrame, "/sequence: expected non-negative integer");
  m.sequence = seq->get<std::uint64_t>();
  if (auto b = doc.find("body"); b != doc.end()) m.body = *b;
  for (const auto& [key, _] : doc.items())
    if (key != "type" && key != "session_id" && key != "sequence" && key != "body")
      throw Error(ErrorCode::MalformedFrame, "/" + key + ": unexpected field");
  return m;
}

std::string encode_frame(const WireMessage& message) {
  const std::string payload = encode_message(message);
  if (payload.size() > kMaxFramePayload) too_large(payload.size());
  std::string out;
  out.reserve(kFrameHeaderBytes + payload.size());
  const auto n = static_cast<std::uint32_t>(payload.size());
  out += static_cast<char>((n >> 24) & 0xff);
  out += static_cast<char>((n >> 16) & 0xff);
  out += static_cast<char>((n >> 8) & 0xff);
  out += static_cast<char>(n & 0xff);
  out += payload;
  return out;
}

WireMessage decode_frame(std::string_view bytes) {
  if (bytes.size() < kFrameHeaderBytes)
    throw Error(ErrorCode::TruncatedFrame, "header needs 4 bytes, got " + std::to_string(bytes.size()));
  const std::size_t n = read_length(bytes);
  if (n > kMaxFramePayload) too_large(n);
  if (bytes.size() < kFrameHeaderBytes + n)
    throw Error(ErrorCode::TruncatedFrame, "payload needs " + std::to_string(n) + " bytes, got " +
                                               std::to_string(bytes.size() - kFrameHeaderBytes));
  if (bytes.size() > kFrameHeaderBytes + n)
    throw Error(ErrorCode::MalformedFrame, std::to_string(bytes.size() - kFrameHeaderBytes - n) + " trailing bytes");
  return decode_message(bytes.substr(kFrameHeaderBytes, n));
}

void FrameDecoder::feed(std::string_view bytes) {
  if (skip_ > 0) {
    const std::size_t dropped = std::min(skip_, bytes.size());
    skip_ -= dropped;
    bytes.remove_prefix(dropped);
  }
  buffer_.append(bytes);
}

void FrameDecoder::compact() {
  if (offset_ > 0 && offset_ * 2 >= buffer_.size()) {
    buffer_.erase(0, offset_);
    offset_ = 0;
  }
}

std::optional<WireMessage> FrameDecoder::next() {
  const std::string_view view(buffer_.data() + offset_, buffer_.size() - offset_);
  if (view.size() < kFrameHeaderBytes) return std::nullopt;
  const std::size_t n = read_length(view);
  if (n > kMaxFramePayload) {
    const std::size_t available = view.size() - kFrameHeaderBytes;
    const std::size_t dropped = std::min(n, available);
    offset_ += kFrameHeaderBytes + dropped;
    skip_ = n - dropped;
    compact();
    too_large(n);
  }
  if (view.size() < kFrameHeaderBytes + n) return std::nullopt;
  const std::string payload(view.substr(kFrameHeaderBytes, n));
  offset_ += kFrameHeaderBytes + n;
  compact();
  return decode_message(payload);
}

}  // namespace scenewright::gateway
