#include "rscm/password_cipher.hpp"

#include "rscm/error.hpp"

#include <sodium.h>

#include <cstdlib>
#include <iostream>
#include <stdexcept>
#include <vector>

namespace rscm
{

namespace
{

void ensure_sodium()
{
  static const bool ready = [] { return sodium_init() >= 0; }();
  if (!ready)
    throw std::runtime_error("libsodium initialisation failed");
}

} // namespace

PasswordCipher::PasswordCipher(std::optional<std::string> secret)
{
  if (!secret || secret->empty())
    return;
  ensure_sodium();
  std::string key(crypto_secretbox_KEYBYTES, '\0');
  crypto_generichash(reinterpret_cast<unsigned char*>(key.data()), key.size(),
                     reinterpret_cast<const unsigned char*>(secret->data()), secret->size(), nullptr, 0);
  key_ = std::move(key);
}

PasswordCipher PasswordCipher::from_environment()
{
  const char* secret = std::getenv("RSCM_SECRET");
  if (!secret || !*secret) {
    std::cerr << "warning: RSCM_SECRET is not set; passwords are stored in plaintext\n";
    return PasswordCipher{};
  }
  return PasswordCipher{std::string(secret)};
}

std::string PasswordCipher::encrypt(std::string_view plain) const
{
  if (!key_)
    return std::string(plain);
  ensure_sodium();
  std::vector<unsigned char> buf(crypto_secretbox_NONCEBYTES + crypto_secretbox_MACBYTES + plain.size());
  unsigned char* nonce = buf.data();
  randombytes_buf(nonce, crypto_secretbox_NONCEBYTES);
  crypto_secretbox_easy(nonce + crypto_secretbox_NONCEBYTES, reinterpret_cast<const unsigned char*>(plain.data()),
                        plain.size(), nonce, reinterpret_cast<const unsigned char*>(key_->data()));

  std::string b64(sodium_base64_encoded_len(buf.size(), sodium_base64_VARIANT_ORIGINAL), '\0');
  sodium_bin2base64(b64.data(), b64.size(), buf.data(), buf.size(), sodium_base64_VARIANT_ORIGINAL);
  b64.resize(std::char_traits<char>::length(b64.c_str()));
  return std::string(prefix) + b64;
}

std::string PasswordCipher::decrypt(std::string_view stored) const
{
  if (!stored.starts_with(prefix))
    return std::string(stored);
  if (!key_)
    throw Error(ErrorCode::DecryptFailed, "encrypted password found but RSCM_SECRET is not set");
  ensure_sodium();

  std::string_view b64 = stored.substr(prefix.size());
  std::vector<unsigned char> buf(b64.size());
  std::size_t len = 0;
  if (sodium_base642bin(buf.data(), buf.size(), b64.data(), b64.size(), nullptr, &len, nullptr,
                        sodium_base64_VARIANT_ORIGINAL) != 0 ||
      len < crypto_secretbox_NONCEBYTES + crypto_secretbox_MACBYTES)
    throw Error(ErrorCode::DecryptFailed, "malformed encrypted password");

  std::string plain(len - crypto_secretbox_NONCEBYTES - crypto_secretbox_MACBYTES, '\0');
  if (crypto_secretbox_open_easy(reinterpret_cast<unsigned char*>(plain.data()), buf.data() + crypto_secretbox_NONCEBYTES,
                                 len - crypto_secretbox_NONCEBYTES, buf.data(),
                                 reinterpret_cast<const unsigned char*>(key_->data())) != 0)
    throw Error(ErrorCode::DecryptFailed, "password does not decrypt with the configured secret");
  return plain;
}

} // namespace rscm
