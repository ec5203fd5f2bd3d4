# -*- coding: utf-8 -*-
"""
CLI 命令模块
"""
