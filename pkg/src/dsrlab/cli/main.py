# -*- coding: utf-8 -*-
import argparse
import importlib
import sys
from pathlib import Path

from ..core import VERSION, ConfigManager, get_logger
from ..core.const import EIGEN_METHODS, PARTITION_METHODS, SR_SOURCES
from ..core.exceptions import BadArgsError, DSRLabError

logger = get_logger()


# 命令缩写映射
COMMAND_ALIASES = {
    "t": "train",
    "ev": "eval",
    "d": "distal",
    "sg": "subgoals",
    "oc": "oracle-check",
    "b": "baseline",
    "c": "config",
    "cfg": "config",
}

ORACLE_SUITES = ["tabular", "td", "gradient", "ncut"]

# 命令 → (commands 下的模块, 处理函数)，执行时才导入
COMMAND_HANDLERS = {
    "train": ("train", "cmd_train"),
    "baseline": ("train", "cmd_baseline"),
    "eval": ("eval", "cmd_eval"),
    "distal": ("distal", "cmd_distal"),
    "subgoals": ("subgoals", "cmd_subgoals"),
    "oracle-check": ("oracle", "cmd_oracle_check"),
    "config": ("config", "cmd_config"),
}


def resolve_command_alias(cmd: str) -> str:
    """解析命令缩写"""
    return COMMAND_ALIASES.get(cmd, cmd)


class DSRLabArgumentParser(argparse.ArgumentParser):
    """参数错误时打印用法并抛出 BadArgsError，而不是直接退出"""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        raise BadArgsError(message)


class DSRLabCLI:
    def __init__(self):
        self.config_manager = ConfigManager()
        self.parser = self._create_parser()

    def _create_parser(self) -> argparse.ArgumentParser:
        """创建命令行解析器"""
        parser = DSRLabArgumentParser(
            prog="dsrlab",
            description="DSR-Lab - 深度后继表示的桌面实验台",
            formatter_class=argparse.RawDescriptionHelpFormatter,
            epilog="""
示例:
  dsrlab oracle-check                         运行全部对照检查
  dsrlab train --config configs/test_maze.toml --seed 7
  dsrlab eval --snapshot runs/train-seed7/snapshot.json
  dsrlab distal --snapshot runs/train-seed7/snapshot.json
  dsrlab subgoals --map builtin:two_rooms
  dsrlab config init

命令缩写:
  t/train, ev/eval, d/distal, sg/subgoals, oc/oracle-check, b/baseline, c/cfg/config
            """,
        )

        parser.add_argument(
            "-v", "--version",
            action="version",
            version=f"dsrlab {VERSION}",
        )

        parser.add_argument(
            "--verbose",
            action="store_true",
            help="详细输出",
        )

        parser.add_argument(
            "--quiet",
            action="store_true",
            help="静默模式",
        )

        # 子命令
        subparsers = parser.add_subparsers(
            dest="command",
            help="可用的子命令",
            metavar="COMMAND",
        )

        self._add_train_parser(subparsers)
        self._add_baseline_parser(subparsers)
        self._add_eval_parser(subparsers)
        self._add_distal_parser(subparsers)
        self._add_subgoals_parser(subparsers)
        self._add_oracle_parser(subparsers)
        self._add_config_parser(subparsers)

        return parser

    @staticmethod
    def _add_common(parser, map_flag: bool = True):
        parser.add_argument("--config", type=str, help="实验配置文件 (TOML)")
        parser.add_argument("--seed", type=int, help="随机种子 (默认取配置中的 seed)")
        parser.add_argument("--output", "-o", type=str, help="输出目录")
        if map_flag:
            parser.add_argument("--map", type=str, help="地图文件或 builtin:<name>")

    def _add_train_parser(self, subparsers):
        """添加 train 命令"""
        parser = subparsers.add_parser("train", aliases=["t"], help="训练 DSR 智能体")
        self._add_common(parser)
        parser.add_argument("--episodes", type=int, help="覆盖 train.total_episodes")
        parser.add_argument("--max-steps", type=int, help="覆盖 train.max_env_steps")
        parser.add_argument("--resume", type=str, help="从快照续跑")

    def _add_baseline_parser(self, subparsers):
        """添加 baseline 命令"""
        parser = subparsers.add_parser("baseline", aliases=["b"], help="训练对照 Q 网络")
        self._add_common(parser)
        parser.add_argument("--episodes", type=int, help="覆盖 train.total_episodes")
        parser.add_argument("--max-steps", type=int, help="覆盖 train.max_env_steps")
        parser.add_argument("--resume", type=str, help="从快照续跑")

    def _add_eval_parser(self, subparsers):
        """添加 eval 命令"""
        parser = subparsers.add_parser("eval", aliases=["ev"], help="评估快照中的策略")
        self._add_common(parser)
        parser.add_argument("--snapshot", type=str, help="DSR 或 Q 网络快照")
        parser.add_argument("--episodes", type=int, help="覆盖 eval.episodes")

    def _add_distal_parser(self, subparsers):
        """添加 distal 命令"""
        parser = subparsers.add_parser("distal", aliases=["d"], help="远端奖励变化实验")
        self._add_common(parser, map_flag=False)
        parser.add_argument("--snapshot", type=str, help="训练好的 DSR 快照")
        parser.add_argument("--baseline-snapshot", type=str, help="对照 Q 网络快照")
        parser.add_argument("--goal-reward", type=float, help="覆盖 distal.goal_reward")

    def _add_subgoals_parser(self, subparsers):
        """添加 subgoals 命令"""
        parser = subparsers.add_parser("subgoals", aliases=["sg"], help="子目标提取")
        self._add_common(parser)
        parser.add_argument("--source", choices=SR_SOURCES, help="SR 来源")
        parser.add_argument("--runs", type=int, help="重复次数")
        parser.add_argument("-k", type=int, help="输出的子目标个数")
        parser.add_argument("--partition", choices=PARTITION_METHODS, help="切分方式")
        parser.add_argument("--eigen", choices=EIGEN_METHODS, help="特征求解方式")
        parser.add_argument("--workers", type=int, help="并行线程数")

    def _add_oracle_parser(self, subparsers):
        """添加 oracle-check 命令"""
        parser = subparsers.add_parser("oracle-check", aliases=["oc"], help="运行对照检查")
        parser.add_argument(
            "--suite",
            action="append",
            choices=ORACLE_SUITES,
            help="只运行指定的检查，可重复 (默认全部)",
        )

    def _add_config_parser(self, subparsers):
        """添加 config 命令"""
        parser = subparsers.add_parser("config", aliases=["c", "cfg"], help="配置管理")
        parser.add_argument("--config", type=str, help="配置文件路径")
        cfg_subparsers = parser.add_subparsers(dest="cfg_action")

        show_parser = cfg_subparsers.add_parser("show", help="显示配置")
        show_parser.add_argument("section", nargs="?", help="只显示这一节 (如 train)")

        get_parser = cfg_subparsers.add_parser("get", help="获取配置项")
        get_parser.add_argument("key", help="配置键 (如 train.gamma)")

        set_parser = cfg_subparsers.add_parser("set", help="设置配置项并写回文件")
        set_parser.add_argument("key", help="配置键")
        set_parser.add_argument("value", help="新值 (列表用逗号分隔)")

        cfg_subparsers.add_parser("init", help="写出默认配置文件")
        cfg_subparsers.add_parser("check", help="列出配置中所有越界的项")

    def run(self, args: list[str] = None) -> int:
        """运行 CLI

        Args:
            args: 命令行参数 (默认使用 sys.argv)

        Returns:
            退出码
        """
        try:
            parsed = self.parser.parse_args(args)
            config_path = getattr(parsed, "config", None)
            if config_path:
                self.config_manager = ConfigManager(Path(config_path))

            # 设置日志
            if parsed.command and resolve_command_alias(parsed.command) != "config":
                cli = self.config_manager.config.cli
                logger.setup(
                    log_level=cli.log_level,
                    log_file=cli.expanded_log_file,
                    verbose=parsed.verbose,
                    quiet=parsed.quiet,
                )
            else:
                logger.setup(verbose=parsed.verbose, quiet=parsed.quiet)

            if parsed.command:
                parsed.command = resolve_command_alias(parsed.command)
            return self._dispatch_command(parsed)
        except DSRLabError as e:
            logger.error_print(str(e.message))
            return e.exit_code
        except KeyboardInterrupt:
            logger.warning_print("\n操作已取消")
            return 130
        except Exception as e:
            logger.error_print(f"发生错误: {e}")
            return 1

    def _dispatch_command(self, args: argparse.Namespace) -> int:
        """按命令表导入处理模块并调用"""
        target = COMMAND_HANDLERS.get(args.command)
        if target is None:
            self.parser.print_help()
            return 0
        module_name, func_name = target
        module = importlib.import_module(f".commands.{module_name}", __package__)
        return getattr(module, func_name)(self.config_manager, args)


def main(args: list[str] = None) -> int:
    cli = DSRLabCLI()
    return cli.run(args)


if __name__ == "__main__":
    raise SystemExit(main())
