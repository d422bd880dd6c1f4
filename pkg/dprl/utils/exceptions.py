__all__ = ["DprlError", "ContractViolation", "ConfigError", "TrainingAborted"]


class DprlError(Exception):
    """Base class for every error raised by the harness."""


class ContractViolation(DprlError, ValueError):
    """
    A caller broke an operation's precondition (bad timestep, empty signal,
    trace too short, ...). `field` names the offending argument or config
    field when there is one.
    """

    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field


class ConfigError(DprlError):
    """Invalid experiment configuration. The message starts with the dotted key."""

    def __init__(self, message, key=None):
        super().__init__(message)
        self.key = key


class TrainingAborted(DprlError, RuntimeError):
    """A training run produced a non-finite loss."""

    def __init__(self, episode, rl_loss, esd_loss, env=None, agent=None, seed=None):
        self.episode = episode
        self.rl_loss = rl_loss
        self.esd_loss = esd_loss
        self.env = env
        self.agent = agent
        self.seed = seed
        where = "/".join(str(part) for part in (env, agent, seed) if part is not None)
        super().__init__(
            f"non-finite loss at episode {episode}"
            f"{' (' + where + ')' if where else ''}: rl_loss={rl_loss!r}, esd_loss={esd_loss!r}"
        )
