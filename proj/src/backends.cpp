#include "longscribe/backends.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>

#include "longscribe/error.hpp"

namespace longscribe {

void validate_token(const TokenPiece& token) {
  if (token.bytes.empty()) fail(ErrorKind::Protocol, "token with empty bytes");
  if (!std::isfinite(token.logprob) || token.logprob > 0.0) {
    fail(ErrorKind::Protocol, "token logprob must be finite and <= 0, got " +
                                  std::to_string(token.logprob));
  }
  if (token.start_s && token.end_s && *token.end_s < *token.start_s) {
    fail(ErrorKind::Protocol, "token ends before it starts");
  }
}

bool Recognizer::is_special(const TokenPiece& token) const {
  if (token.special) return true;
  const std::string& b = token.bytes;
  return b.size() >= 4 && b.starts_with("<|") && b.ends_with("|>");
}

namespace {

class GuardedFrameClassifier final : public FrameClassifier {
 public:
  explicit GuardedFrameClassifier(std::shared_ptr<FrameClassifier> inner) : inner_(std::move(inner)) {}
  std::string name() const override { return inner_->name(); }
  double frame_hop_s() const override { return inner_->frame_hop_s(); }
  std::vector<double> classify_frames(const AudioBuffer& audio) override {
    std::lock_guard lock(mutex_);
    return inner_->classify_frames(audio);
  }

 private:
  std::shared_ptr<FrameClassifier> inner_;
  std::mutex mutex_;
};

class GuardedSegmentClassifier final : public SegmentClassifier {
 public:
  explicit GuardedSegmentClassifier(std::shared_ptr<SegmentClassifier> inner) : inner_(std::move(inner)) {}
  std::string name() const override { return inner_->name(); }
  LabelScores classify_segment(const AudioBuffer& slice, const ChunkContext& context) override {
    std::lock_guard lock(mutex_);
    return inner_->classify_segment(slice, context);
  }

 private:
  std::shared_ptr<SegmentClassifier> inner_;
  std::mutex mutex_;
};

class GuardedRecognizer final : public Recognizer {
 public:
  explicit GuardedRecognizer(std::shared_ptr<Recognizer> inner) : inner_(std::move(inner)) {}
  std::string name() const override { return inner_->name(); }
  std::vector<TokenPiece> recognize(const AudioBuffer& slice, const ChunkContext& context) override {
    std::lock_guard lock(mutex_);
    return inner_->recognize(slice, context);
  }
  bool is_special(const TokenPiece& token) const override { return inner_->is_special(token); }

 private:
  std::shared_ptr<Recognizer> inner_;
  std::mutex mutex_;
};

class GuardedSequenceScorer final : public SequenceScorer {
 public:
  explicit GuardedSequenceScorer(std::shared_ptr<SequenceScorer> inner) : inner_(std::move(inner)) {}
  std::string name() const override { return inner_->name(); }
  double score(std::span<const std::string> words) override {
    std::lock_guard lock(mutex_);
    return inner_->score(words);
  }

 private:
  std::shared_ptr<SequenceScorer> inner_;
  std::mutex mutex_;
};

template <typename Guarded, typename Backend>
std::shared_ptr<Backend> guard_impl(std::shared_ptr<Backend> backend) {
  if (!backend || backend->thread_safe()) return backend;
  return std::make_shared<Guarded>(std::move(backend));
}

}  // namespace

std::shared_ptr<FrameClassifier> guard(std::shared_ptr<FrameClassifier> backend) {
  return guard_impl<GuardedFrameClassifier>(std::move(backend));
}
std::shared_ptr<SegmentClassifier> guard(std::shared_ptr<SegmentClassifier> backend) {
  return guard_impl<GuardedSegmentClassifier>(std::move(backend));
}
std::shared_ptr<Recognizer> guard(std::shared_ptr<Recognizer> backend) {
  return guard_impl<GuardedRecognizer>(std::move(backend));
}
std::shared_ptr<SequenceScorer> guard(std::shared_ptr<SequenceScorer> backend) {
  return guard_impl<GuardedSequenceScorer>(std::move(backend));
}

std::vector<double> speech_probs_from_blank(std::span<const double> blank_probs) {
  std::vector<double> out;
  out.reserve(blank_probs.size());
  for (double p : blank_probs) {
    require(std::isfinite(p), "blank probability must be finite");
    out.push_back(std::clamp(1.0 - p, 0.0, 1.0));
  }
  return out;
}

}  // namespace longscribe
