#pragma once

#include "causagen/engine.hpp"

#include <json.hpp>

#include <memory>
#include <mutex>
#include <string>

namespace causagen {

inline constexpr int kBridgeProtocol = 1;

// Wire format, one JSON object per line in each direction:
//   {"op":"handshake"}              -> {"ok":true,"protocol":1,"model":"..."}
//   {"op":"generate", ...request}   -> {"ok":true,"data":[[...],...]}
//   {"op":"shutdown"}               -> {"ok":true}, then the server exits
// Failures come back as {"ok":false,"error":"..."}.
nlohmann::json encode_generate_request(const GenerationRequest& req);
Table decode_generate_response(const nlohmann::json& response, const Schema& schema,
                               std::size_t n_samples);
// Server-side helpers, shared with the mock model used in tests.
GenerationRequest decode_generate_request(const nlohmann::json& request);
nlohmann::json encode_table_rows(const Table& t);

// Child process speaking the protocol over its stdin/stdout.
class BridgeProcess {
 public:
  explicit BridgeProcess(const std::string& command);
  ~BridgeProcess();
  BridgeProcess(const BridgeProcess&) = delete;
  BridgeProcess& operator=(const BridgeProcess&) = delete;

  nlohmann::json call(const nlohmann::json& request);
  // Sends shutdown and waits; returns the child's exit status.
  int shutdown();

 private:
  void write_line(const std::string& line);
  std::string read_line();

  int pid_ = -1;
  int to_child_ = -1;
  int from_child_ = -1;
  std::string buffer_;
  bool finished_ = false;
};

// TableGenerator backed by an external model. Handshakes on construction.
class BridgeGenerator final : public TableGenerator {
 public:
  explicit BridgeGenerator(const std::string& command);
  ~BridgeGenerator() override;

  const nlohmann::json& handshake() const { return handshake_; }
  Table generate(const GenerationRequest& req) const override;

 private:
  std::unique_ptr<BridgeProcess> process_;
  nlohmann::json handshake_;
  mutable std::mutex mutex_;
};

}  // namespace causagen
