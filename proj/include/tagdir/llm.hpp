#pragma once

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
#define CPPHTTPLIB_OPENSSL_SUPPORT
#endif
#include <httplib.h>
#include <json.hpp>
#include <openssl/evp.h>

#include "tagdir/data.hpp"
#include "tagdir/tags.hpp"

namespace tagdir {

enum class PromptMode { tag, type };

inline constexpr std::string_view system_prompt =
    "You are an expert in annotating variables to provide additional information that helps to support a "
    "causal discovery algorithm.";

inline constexpr std::string_view tagging_template =
    "A tag is a single word or short phrase that describes a variable. Tags should be general enough to be "
    "applicable to multiple variables but specific enough to identify differences between similar variables. "
    "Tags will be used to identify causal directions between variables. Therefore, the individual sets of tags "
    "per variable should be discriminative enough to inform the algorithm. Variables can have multiple tags.\n"
    "Consider the following variables: {variables}.\n\n"
    "Please generate a list of tags that can be assigned to one or multiple variables. Generate the number of "
    "tags necessary to strike a good balance between expressivity and specificity. Avoid duplicate tags that "
    "contain the same set of variables. Reply with one line per tag, where each line starts with the name of the "
    "tag, followed by a colon, and then a comma-separated list of variables that have that tag. The output "
    "should be machine parsable. For that reason, do not include any explanations or additional comments.";

inline constexpr std::string_view typing_template =
    "A type is a single word or short phrase that describes a variable. Types should be general enough to be "
    "applicable to multiple variables but specific enough to identify differences between similar variables. "
    "Types will be used to identify causal directions between variables. Therefore, the individual types should "
    "be discriminative enough to inform the algorithm. Variables are assigned to a single type only.\n"
    "Consider the following variables: {variables}.\n\n"
    "Please generate a list of types that can be assigned to one or multiple variables. Generate the number of "
    "types necessary to strike a good balance between expressivity and specificity. Reply with one line per "
    "type, where each line starts with the name of the type, followed by a colon, and then a comma-separated "
    "list of variables that belong to that type. Make sure that no variable appears in more than one the lists. "
    "The output should be machine parsable. For that reason, do not include any explanations or additional "
    "comments.";

struct PromptSpec {
  std::string system;
  std::string instruction;
  std::vector<std::string> variables;
  PromptMode mode = PromptMode::tag;
};

inline PromptSpec build_prompt(const std::vector<std::string>& vars, PromptMode mode) {
  if (vars.empty()) throw EmptyVariableList("no variables to annotate");
  std::string list;
  for (std::size_t i = 0; i < vars.size(); ++i) list += (i ? ", " : "") + vars[i];
  std::string text(mode == PromptMode::tag ? tagging_template : typing_template);
  constexpr std::string_view slot = "{variables}";
  text.replace(text.find(slot), slot.size(), list);
  return {std::string(system_prompt), std::move(text), vars, mode};
}

struct ProviderConfig {
  std::string base_url = "https://api.openai.com/v1";
  std::string model = "gpt-4-0613";
  std::string api_key_env = "OPENAI_API_KEY";
  double temperature = 0.0;
  int timeout_seconds = 120;
  std::string cache_dir = "llm-cache";
};

inline std::string sha256_hex(std::string_view data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), data.data(), data.size()) != 1 || EVP_DigestFinal_ex(ctx.get(), md, &len) != 1)
    throw Error("sha256 failed");
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  for (unsigned i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

// The exact text sent: system prompt, blank line, user message.
inline std::string prompt_text(const PromptSpec& spec) { return spec.system + "\n\n" + spec.instruction; }

inline std::string cache_file_name(const ProviderConfig& cfg, const PromptSpec& spec) {
  std::string model = cfg.model;
  for (char& c : model)
    if (c == '/' || c == '\\' || c == ':') c = '_';
  return model + "-" + sha256_hex(prompt_text(spec)) + ".json";
}

inline std::string request_body(const ProviderConfig& cfg, const PromptSpec& spec) {
  nlohmann::json body = {
      {"model", cfg.model},
      {"temperature", cfg.temperature},
      {"messages",
       nlohmann::json::array({{{"role", "system"}, {"content", spec.system}},
                              {{"role", "user"}, {"content", spec.instruction}}})},
  };
  return body.dump();
}

inline std::string extract_reply(const std::string& response_body) {
  try {
    auto j = nlohmann::json::parse(response_body);
    return j.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("unexpected chat response: ") + e.what());
  }
}

// Parses a reply in the tag file format. Markdown fence lines are ignored;
// in typing mode a variable may appear in one list only.
inline TagAssignment parse_reply(const std::string& reply, const std::vector<std::string>& vars, PromptMode mode) {
  std::string cleaned;
  std::size_t pos = 0;
  while (pos <= reply.size()) {
    auto nl = reply.find('\n', pos);
    if (nl == std::string::npos) nl = reply.size();
    std::string_view line(reply.data() + pos, nl - pos);
    pos = nl + 1;
    if (trim(line).substr(0, 3) == "```") line = {};
    cleaned.append(line);
    cleaned += '\n';
  }
  TagAssignment a;
  try {
    a = parse_tags(cleaned, vars);
  } catch (const MalformedLine& e) {
    throw ParseError("reply line without a tag", e.line());
  }
  if (mode == PromptMode::type)
    for (VarId v = 0; v < a.num_vars(); ++v)
      if (a.tags_of(v).size() > 1) throw TypeOverlap("variable " + vars[v] + " has more than one type");
  return a;
}

class ChatTransport {
 public:
  virtual ~ChatTransport() = default;
  // POSTs a JSON body to the chat endpoint and returns the response body.
  virtual std::string post(const ProviderConfig& cfg, const std::string& body) = 0;
};

class HttpTransport : public ChatTransport {
 public:
  std::string post(const ProviderConfig& cfg, const std::string& body) override {
    auto scheme_end = cfg.base_url.find("://");
    if (scheme_end == std::string::npos) throw Error("base_url needs a scheme: " + cfg.base_url);
    auto path_start = cfg.base_url.find('/', scheme_end + 3);
    std::string origin = cfg.base_url.substr(0, path_start);
    std::string prefix = path_start == std::string::npos ? "" : cfg.base_url.substr(path_start);
    while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();

    httplib::Client client(origin);
    client.set_connection_timeout(cfg.timeout_seconds, 0);
    client.set_read_timeout(cfg.timeout_seconds, 0);
    httplib::Headers headers;
    if (!cfg.api_key_env.empty()) {
      const char* key = std::getenv(cfg.api_key_env.c_str());
      if (!key || !*key) throw Error("environment variable " + cfg.api_key_env + " is not set");
      headers.emplace("Authorization", std::string("Bearer ") + key);
    }
    auto res = client.Post(prefix + "/chat/completions", headers, body, "application/json");
    if (!res) throw HttpError(0, "request failed: " + httplib::to_string(res.error()));
    if (res->status < 200 || res->status >= 300) throw HttpError(res->status, res->body.substr(0, 200));
    return res->body;
  }
};

struct TagResponse {
  TagAssignment tags;
  std::string reply;
  bool from_cache = false;
};

inline void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  std::random_device rd;
  auto tmp = path;
  tmp += ".tmp" + std::to_string(rd());
  write_file(tmp.string(), content);
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw IoError("cannot move cache file into place: " + ec.message());
  }
}

inline TagResponse request_tags(const ProviderConfig& cfg, const PromptSpec& spec, ChatTransport& transport) {
  if (cfg.temperature != 0.0) throw ConfigError("temperature must be 0");
  namespace fs = std::filesystem;
  fs::path cache = fs::path(cfg.cache_dir) / cache_file_name(cfg, spec);
  TagResponse r;
  std::string body;
  if (fs::exists(cache)) {
    body = read_file(cache.string());
    r.from_cache = true;
  } else {
    body = transport.post(cfg, request_body(cfg, spec));
    extract_reply(body);  // validate before caching
    fs::create_directories(cfg.cache_dir);
    write_file_atomic(cache, body);
  }
  r.reply = extract_reply(body);
  r.tags = parse_reply(r.reply, spec.variables, spec.mode);
  return r;
}

inline TagResponse request_tags(const ProviderConfig& cfg, const PromptSpec& spec) {
  HttpTransport http;
  return request_tags(cfg, spec, http);
}

}  // namespace tagdir
