#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace rscm
{

// Symmetric encryption of password parameters in the configuration file.
// Stored form is "{enc}" followed by base64(nonce || secretbox). Without a
// secret, values pass through as plaintext.
class PasswordCipher
{
public:
  static constexpr std::string_view prefix = "{enc}";

  PasswordCipher() = default;
  explicit PasswordCipher(std::optional<std::string> secret);

  // Reads RSCM_SECRET; warns on stderr when it is unset.
  static PasswordCipher from_environment();

  bool enabled() const noexcept { return key_.has_value(); }

  std::string encrypt(std::string_view plain) const;
  // Plaintext (unprefixed) values are accepted as-is. Throws
  // Error(DecryptFailed) for ciphertext that cannot be opened.
  std::string decrypt(std::string_view stored) const;

private:
  std::optional<std::string> key_;
};

} // namespace rscm
