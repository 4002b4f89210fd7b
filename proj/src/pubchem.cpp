// SPDX-FileCopyrightText: Copyright (c) 2026 The sddi authors. All rights reserved.
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "sddi/pubchem.hpp"

#include <curl/curl.h>

#include <algorithm>
#include <cctype>
#include <fstream>
#include <stdexcept>
#include <thread>

#include "sddi/errors.hpp"
#include "sddi/image.hpp"

namespace sddi {

namespace {

std::size_t append_body(char* data, std::size_t size, std::size_t count, void* user) {
  auto* body = static_cast<std::vector<std::uint8_t>*>(user);
  body->insert(body->end(), data, data + size * count);
  return size * count;
}

struct CurlGlobal {
  CurlGlobal() { curl_global_init(CURL_GLOBAL_DEFAULT); }
  ~CurlGlobal() { curl_global_cleanup(); }
};

}  // namespace

CurlTransport::CurlTransport(std::chrono::seconds timeout) : handle_(nullptr), timeout_(timeout) {
  static CurlGlobal global;
  handle_ = curl_easy_init();
  if (handle_ == nullptr) throw FetchError("curl_easy_init failed");
}

CurlTransport::~CurlTransport() { curl_easy_cleanup(static_cast<CURL*>(handle_)); }

HttpResponse CurlTransport::get(const std::string& url) {
  CURL* curl = static_cast<CURL*>(handle_);
  HttpResponse response;
  curl_easy_reset(curl);
  curl_easy_setopt(curl, CURLOPT_URL, url.c_str());
  curl_easy_setopt(curl, CURLOPT_FOLLOWLOCATION, 1L);
  curl_easy_setopt(curl, CURLOPT_TIMEOUT, static_cast<long>(timeout_.count()));
  curl_easy_setopt(curl, CURLOPT_WRITEFUNCTION, append_body);
  curl_easy_setopt(curl, CURLOPT_WRITEDATA, &response.body);
  const CURLcode rc = curl_easy_perform(curl);
  if (rc != CURLE_OK) throw FetchError(std::string("GET ") + url + ": " + curl_easy_strerror(rc));
  curl_easy_getinfo(curl, CURLINFO_RESPONSE_CODE, &response.status);
  return response;
}

Clock::duration SteadyClock::now() { return std::chrono::steady_clock::now().time_since_epoch(); }

void SteadyClock::sleep_for(duration d) { std::this_thread::sleep_for(d); }

std::string pubchem_png_url(const std::string& cid, const std::string& image_size) {
  return "https://pubchem.ncbi.nlm.nih.gov/rest/pug/compound/cid/" + cid + "/PNG?image_size=" + image_size;
}

bool is_valid_cid(const std::string& cid) {
  return !cid.empty() && cid.size() <= 12 &&
         std::all_of(cid.begin(), cid.end(), [](unsigned char c) { return std::isdigit(c) != 0; });
}

PubchemFetcher::PubchemFetcher(HttpTransport& transport, Clock& clock, FetchOptions options)
    : transport_(transport), clock_(clock), options_(std::move(options)) {}

HttpResponse PubchemFetcher::throttled_get(const std::string& url) {
  if (last_request_) {
    const auto ready = *last_request_ + options_.min_interval;
    const auto now = clock_.now();
    if (now < ready) clock_.sleep_for(ready - now);
  }
  last_request_ = clock_.now();
  ++requests_;
  return transport_.get(url);
}

std::filesystem::path PubchemFetcher::fetch(const std::string& cid, const std::filesystem::path& out_dir) {
  if (!is_valid_cid(cid)) throw std::invalid_argument("invalid CID '" + cid + "': must be numeric");
  const auto target = out_dir / (cid + ".png");
  if (std::filesystem::exists(target)) return target;

  const std::string url = pubchem_png_url(cid, options_.image_size);
  auto backoff = std::chrono::duration_cast<Clock::duration>(options_.initial_backoff);
  std::string last_failure;
  for (int attempt = 0; attempt <= options_.max_retries; ++attempt) {
    if (attempt > 0) {
      clock_.sleep_for(backoff);
      backoff *= 2;
    }
    HttpResponse response;
    try {
      response = throttled_get(url);
    } catch (const FetchError& e) {
      last_failure = e.what();
      continue;
    }
    if (response.status == 404) throw FetchError("unknown CID " + cid);
    if (response.status >= 500) {
      last_failure = "HTTP " + std::to_string(response.status);
      continue;
    }
    if (response.status != 200) {
      throw FetchError("CID " + cid + ": HTTP " + std::to_string(response.status));
    }
    if (!has_png_signature(response.body)) throw IngestionError("CID " + cid + ": response is not a PNG");

    std::filesystem::create_directories(out_dir);
    const auto tmp = out_dir / (cid + ".png.part");
    {
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      out.write(reinterpret_cast<const char*>(response.body.data()),
                static_cast<std::streamsize>(response.body.size()));
      if (!out) throw IngestionError("cannot write " + tmp.string());
    }
    std::filesystem::rename(tmp, target);
    return target;
  }
  throw FetchError("CID " + cid + ": giving up after " + std::to_string(options_.max_retries) +
                   " retries (" + last_failure + ")");
}

std::filesystem::path fetch_pubchem_png(const std::string& cid, const std::filesystem::path& out_dir,
                                        const std::string& image_size) {
  CurlTransport transport;
  SteadyClock clock;
  FetchOptions options;
  options.image_size = image_size;
  PubchemFetcher fetcher(transport, clock, options);
  return fetcher.fetch(cid, out_dir);
}

}  // namespace sddi
