#![no_main]
use libfuzzer_sys::fuzz_target;

use lorlab::io::CampaignConfig;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(CampaignConfig::Decide { query, .. } | CampaignConfig::Verify { query, .. }) = CampaignConfig::from_json(text) {
        let _ = query.to_query();
    }
});
