use std::time::Duration;

use eidoku_core::{
    BuiltinProviders, ExternalProvider, Memoized, ProviderError, ProviderSpec, Providers,
};

pub const PROVIDER_ENV: &str = "EIDOKU_PROVIDER";

pub enum ProviderHandle {
    Builtin(BuiltinProviders),
    External(Memoized<ExternalProvider>),
}

impl ProviderHandle {
    /// Reads `EIDOKU_PROVIDER`; unset or empty means builtin.
    pub fn from_env(timeout: Duration) -> Result<(Self, ProviderSpec), ProviderError> {
        let raw = std::env::var(PROVIDER_ENV).unwrap_or_default();
        let spec: ProviderSpec = raw.parse()?;
        let handle = match &spec {
            ProviderSpec::Builtin => Self::Builtin(BuiltinProviders::standard()),
            other => Self::External(Memoized::new(ExternalProvider::connect(other, timeout)?)),
        };
        Ok((handle, spec))
    }

    pub fn providers(&self) -> Providers<'_> {
        match self {
            Self::Builtin(b) => b.providers(),
            Self::External(e) => Providers::new(e, e),
        }
    }
}
