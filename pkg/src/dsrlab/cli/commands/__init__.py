# -*- coding: utf-8 -*-
"""
CLI 命令实现模块
"""
