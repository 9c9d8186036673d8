from dataclasses import asdict, is_dataclass
from typing import Optional

from torch.utils.tensorboard import SummaryWriter


class Logger:
    def __init__(self, log_wandb=False, tensorboard: SummaryWriter = None) -> None:
        self.writer = tensorboard
        self.log_wandb = log_wandb
        self._closed = False

    def add_scalar(self, tag, scalar_value, step):
        if self.log_wandb:
            import wandb
            wandb.log({tag: scalar_value}, step=step)
        self.writer.add_scalar(tag, scalar_value, step)

    def add_hyperparameters(self, config):
        values = asdict(config) if is_dataclass(config) else dict(config)
        self.writer.add_text(
            "hyperparameters",
            "|param|value|\n|-|-|\n%s" % ("\n".join([f"|{key}|{value}|" for key, value in values.items()])),
        )

    def close(self):
        if self._closed:
            return
        self._closed = True
        self.writer.close()
        if self.log_wandb:
            import wandb
            wandb.finish()


def create_logger(log_dir: str, run_name: str, config=None, track: bool = False,
                  wandb_project_name: str = "SocialMuse", wandb_entity: Optional[str] = None) -> Logger:
    if track:
        import wandb
        wandb.init(
            project=wandb_project_name,
            entity=wandb_entity,
            config=asdict(config) if is_dataclass(config) else config,
            name=run_name,
            save_code=True,
        )
    logger = Logger(log_wandb=track, tensorboard=SummaryWriter(log_dir))
    if config is not None:
        logger.add_hyperparameters(config)
    return logger
