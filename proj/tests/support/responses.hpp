#pragma once

// Canonical model-response fixtures used by the parser tests: two complete
// analyst-style answers ending in a fenced JSON block, plus rewrites of the
// same content in the sloppier shapes real chat models produce.

namespace testsupport {

inline const char* facebook_response() {
  return R"RESP(1. Suspicious elements:
- The URL contains a subdomain "securitypages", which is unrelated to the legitimate Facebook domain (www.facebook.com).
- The extracted text alerts the user about having 12 hours to cancel the account. This is a social engineering technique often used in phishing attacks.
- Furthermore, the link provided redirects to a suspicious, non-legitimate URL: "http://centrenotificationvices.duckdns.org/cntre.html".

2. The brand name identified is Meta Facebook.

3. The site appears to be a phishing site because of the suspicious URL and social engineering tactics in the text.

4. JSON-formatted output:

```
{
  "phishing_score": 9,
  "brands": "Meta Facebook",
  "phishing": true,
  "suspicious_domain": true
}
```)RESP";
}

inline const char* dhl_response() {
  return R"RESP(Based on my analysis of the HTML, URL, and OCR-extracted text, here are my findings:

1. Suspicious elements in the HTML and OCR-extracted text:
   a. The site prompts the user to pay an import duty/tax amounting to 2£ on their shipment, which could be a social engineering technique to trick the user into providing their payment information.
   b. The HTML structure has a card data input form where the user is expected to enter their card details, such as card number, expiry date, CVC number, and cardholder's name. This could be an attempt to steal sensitive card information.

2. The brand name identified is "DHL EXPRESS".

3. The URL (https://siges.com.br/service/) does not match the legitimate domain name associated with the DHL brand, which is "dhl.com". This mismatch is a red flag as it is not coming from the legitimate source.

Considering my findings, I conclude that this site is a phishing site attempting to steal user payment information by posing as a DHL EXPRESS page.

Here's the JSON-formatted output of my findings:

```
{
  "phishing_score": 9,
  "brands": "DHL EXPRESS",
  "phishing": true,
  "suspicious_domain": true
}
```)RESP";
}

// Same fields as facebook_response(), but written the way a Python-leaning
// model does: single quotes, capitalized booleans, no fences.
inline const char* facebook_response_single_quoted() {
  return "After reviewing the page I would summarize it as follows.\n\n"
         "Result: {'phishing_score': 9, 'brands': 'Meta Facebook', "
         "'phishing': True, 'suspicious_domain': True}\n";
}

inline const char* dhl_response_single_quoted() {
  return "Here is my assessment of the shipping page:\n\n"
         "{'phishing_score': 9, 'brands': 'DHL EXPRESS', 'phishing': True, "
         "'suspicious_domain': True, }\n";
}

// No JSON anywhere; the fields only exist as prose mentions.
inline const char* prose_unknown_response() {
  return "The capture contains almost no content, so there is insufficient "
         "evidence for a determination. I would assign phishing_score: 5 at "
         "most. For this page phishing is unknown and the suspicious_domain "
         "is unknown as well; no brand name could be identified.\n";
}

}  // namespace testsupport
