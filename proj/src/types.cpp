#include "aic3/types.hpp"

#include "aic3/errors.hpp"

namespace aic3 {

std::string_view to_string(Protocol p) { return p == Protocol::btc ? "btc" : "ptc"; }

std::string_view to_string(QuestionKind k) {
  switch (k) {
    case QuestionKind::same_codec: return "same_codec";
    case QuestionKind::cross_codec: return "cross_codec";
    case QuestionKind::bias: return "bias";
    case QuestionKind::trap: return "trap";
  }
  return "?";
}

std::string_view to_string(Answer a) {
  switch (a) {
    case Answer::left: return "left";
    case Answer::right: return "right";
    case Answer::not_sure: return "not_sure";
  }
  return "?";
}

Protocol parse_protocol(std::string_view s) {
  if (s == "btc" || s == "BTC") return Protocol::btc;
  if (s == "ptc" || s == "PTC") return Protocol::ptc;
  throw InputError("unknown protocol '" + std::string(s) + "'");
}

QuestionKind parse_kind(std::string_view s) {
  if (s == "same_codec") return QuestionKind::same_codec;
  if (s == "cross_codec") return QuestionKind::cross_codec;
  if (s == "bias") return QuestionKind::bias;
  if (s == "trap") return QuestionKind::trap;
  throw InputError("unknown question kind '" + std::string(s) + "'");
}

Answer parse_answer(std::string_view s) {
  if (s == "left") return Answer::left;
  if (s == "right") return Answer::right;
  if (s == "not_sure") return Answer::not_sure;
  throw InputError("unknown answer '" + std::string(s) + "'");
}

StimulusKey make_key(std::string source_id, std::string codec_id, int level) {
  if (level < 0 || level > kMaxLevel) throw InputError("distortion level out of range: " + std::to_string(level));
  if (level == 0) codec_id = std::string(kSourceCodec);
  else if (codec_id == kSourceCodec) throw InputError("codec 'source' is reserved for level 0");
  return StimulusKey{std::move(source_id), std::move(codec_id), level};
}

std::string to_string(const StimulusKey& key) {
  return key.source_id + "/" + key.codec_id + "/" + std::to_string(key.level);
}

}  // namespace aic3
